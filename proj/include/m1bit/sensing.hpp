// Measurement/saturation data model, synthetic problem generation, metrics.
#pragma once

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "m1bit/core.hpp"
#include "m1bit/rng.hpp"

namespace m1bit {

/// Dense sensing matrix; row i is the sensing vector u_i, so apply(x)_i = u_i'x.
template <typename S>
struct SensingMatrix {
  Matrix<S> A;  // m x d

  Index rows() const { return A.rows(); }
  Index cols() const { return A.cols(); }
  Vector<S> apply(const Vector<S>& x) const { return A * x; }
  Vector<S> adjoint(const Vector<S>& y) const { return A.transpose() * y; }
};

/// Observations of a saturated linear system. For saturated entries (psi=1),
/// y gives the clip side (+1 upper, -1 lower) and s the active threshold.
template <typename S>
struct SaturatedObservations {
  Vector<S> p;   // observed (clipped) values
  ArrayXb psi;   // saturation indicator
  Vector<S> y;   // +-1 where psi=1, 0 elsewhere
  Vector<S> s;   // active threshold where psi=1 (s_plus or s_minus; per-view in CT)
  S s_minus = -std::numeric_limits<S>::infinity();
  S s_plus = std::numeric_limits<S>::infinity();

  Index size() const { return p.size(); }
  Index saturated_count() const { return psi.template cast<Index>().sum(); }
};

template <typename S>
struct NoiseModel {
  enum class Kind { none, gaussian };
  Kind kind = Kind::none;
  S target_ratio = S(0);  // s_n = |q_clean|^2 / |noise|^2
  S sigma = S(0);         // realized standard deviation, filled by realize()

  /// Samples noise and rescales it so the realized energy ratio equals
  /// target_ratio exactly.
  Vector<S> realize(const Vector<S>& q_clean, RandomStream& stream) {
    if (kind == Kind::none || target_ratio <= S(0)) {
      sigma = S(0);
      return Vector<S>::Zero(q_clean.size());
    }
    Vector<S> eps(q_clean.size());
    for (Index i = 0; i < eps.size(); ++i) eps[i] = static_cast<S>(stream.normal());
    const S en = eps.norm();
    if (en == S(0)) return eps;
    const S scale = q_clean.norm() / (std::sqrt(target_ratio) * en);
    eps *= scale;
    sigma = std::sqrt(eps.squaredNorm() / static_cast<S>(eps.size()));
    return eps;
  }
};

struct SyntheticProblemSpec {
  Index d = 0;           // signal dimension
  Index K = 0;           // nonzero count
  Index m = 0;           // measurements
  Index n = 0;           // saturated measurements (n/2 upper, n/2 lower)
  double s_n = 0.0;      // noise energy ratio (0 = noiseless)
  std::uint64_t seed = 0;

  void validate() const {
    if (d < 1) throw std::invalid_argument("SyntheticProblemSpec: d must be >= 1");
    if (K < 0 || K > d) throw std::invalid_argument("SyntheticProblemSpec: need 0 <= K <= d");
    if (m < 1) throw std::invalid_argument("SyntheticProblemSpec: m must be >= 1");
    if (n < 0 || n > m) throw std::invalid_argument("SyntheticProblemSpec: need 0 <= n <= m");
    if (n % 2 != 0) throw std::invalid_argument("SyntheticProblemSpec: n must be even");
    if (s_n < 0) throw std::invalid_argument("SyntheticProblemSpec: s_n must be >= 0");
  }
};

/// K-sparse unit-norm signal with Gaussian nonzeros on a uniform random
/// support. K = 0 yields the zero vector (norm degenerate, no scaling).
template <typename S = double>
Vector<S> generate_true_signal(const SyntheticProblemSpec& spec) {
  spec.validate();
  Vector<S> x = Vector<S>::Zero(spec.d);
  if (spec.K == 0) return x;

  // Partial Fisher-Yates draw of K support indices.
  RandomStream sup(spec.seed, StreamTag::signal_support);
  std::vector<Index> idx(static_cast<std::size_t>(spec.d));
  std::iota(idx.begin(), idx.end(), Index(0));
  for (Index k = 0; k < spec.K; ++k) {
    const auto j = k + static_cast<Index>(sup.uniform_below(static_cast<std::uint64_t>(spec.d - k)));
    std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(j)]);
  }

  RandomStream val(spec.seed, StreamTag::signal_values);
  for (Index k = 0; k < spec.K; ++k) x[idx[static_cast<std::size_t>(k)]] = static_cast<S>(val.normal());
  const S nrm = x.norm();
  if (nrm > S(0)) x /= nrm;
  return x;
}

/// m x d sensing matrix with i.i.d. standard normal entries (row-major draw order).
template <typename S = double>
SensingMatrix<S> generate_sensing_matrix(const SyntheticProblemSpec& spec) {
  spec.validate();
  RandomStream stream(spec.seed, StreamTag::sensing_matrix);
  SensingMatrix<S> U;
  U.A.resize(spec.m, spec.d);
  for (Index i = 0; i < spec.m; ++i)
    for (Index j = 0; j < spec.d; ++j) U.A(i, j) = static_cast<S>(stream.normal());
  return U;
}

/// Saturation levels such that exactly n/2 measurements exceed s_plus and n/2
/// fall below s_minus; thresholds sit midway between bounding order statistics
/// (ties by index; a degenerate tie nudges the threshold outward by one ulp so
/// tied values stay analog). n = 0 returns the (-inf, +inf) sentinels.
template <typename S>
std::pair<S, S> choose_saturation_levels(const Vector<S>& q_noisy, Index n) {
  const Index m = q_noisy.size();
  if (n % 2 != 0) throw std::invalid_argument("choose_saturation_levels: n must be even");
  if (n < 0 || n > m) throw std::invalid_argument("choose_saturation_levels: need 0 <= n <= m");
  if (n == 0)
    return {-std::numeric_limits<S>::infinity(), std::numeric_limits<S>::infinity()};
  if (n == m)
    std::cerr << "choose_saturation_levels: n == m leaves no interior analog measurements\n";

  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index(0));
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    return q_noisy[a] != q_noisy[b] ? q_noisy[a] < q_noisy[b] : a < b;
  });
  const Index h = n / 2;

  auto midpoint = [](S lo, S hi, bool upper) {
    if (lo != hi) return lo + (hi - lo) / S(2);
    // Tied boundary: nudge outward so the tied values remain analog.
    return upper ? std::nextafter(hi, std::numeric_limits<S>::infinity())
                 : std::nextafter(lo, -std::numeric_limits<S>::infinity());
  };

  if (n == m) {
    // No interior: clip exactly at the straddling order statistics (boundary
    // equality counts as saturated on both sides).
    S lo = q_noisy[order[static_cast<std::size_t>(h - 1)]];
    S hi = q_noisy[order[static_cast<std::size_t>(h)]];
    if (lo == hi) lo = std::nextafter(lo, -std::numeric_limits<S>::infinity());
    return {lo, hi};
  }

  // Lower threshold between order statistics h-1 and h.
  S s_minus = midpoint(q_noisy[order[static_cast<std::size_t>(h - 1)]],
                       q_noisy[order[static_cast<std::size_t>(h)]], false);
  // Upper threshold between order statistics m-h-1 and m-h.
  S s_plus = midpoint(q_noisy[order[static_cast<std::size_t>(m - h - 1)]],
                      q_noisy[order[static_cast<std::size_t>(m - h)]], true);
  return {s_minus, s_plus};
}

/// Clips q to [s_minus, s_plus]; boundary equality counts as saturated.
template <typename S>
SaturatedObservations<S> saturate_measurements(const Vector<S>& q_noisy, S s_minus, S s_plus) {
  if (!(s_minus < s_plus)) throw std::invalid_argument("saturate_measurements: need s_minus < s_plus");
  if (!q_noisy.allFinite()) throw std::invalid_argument("saturate_measurements: non-finite measurement");
  const Index m = q_noisy.size();
  SaturatedObservations<S> obs;
  obs.p.resize(m);
  obs.psi.resize(m);
  obs.y = Vector<S>::Zero(m);
  obs.s = Vector<S>::Zero(m);
  obs.s_minus = s_minus;
  obs.s_plus = s_plus;
  for (Index i = 0; i < m; ++i) {
    const S q = q_noisy[i];
    if (q >= s_plus) {
      obs.p[i] = s_plus;
      obs.psi[i] = true;
      obs.y[i] = S(1);
      obs.s[i] = s_plus;
    } else if (q <= s_minus) {
      obs.p[i] = s_minus;
      obs.psi[i] = true;
      obs.y[i] = S(-1);
      obs.s[i] = s_minus;
    } else {
      obs.p[i] = q;
      obs.psi[i] = false;
    }
  }
  return obs;
}

/// Reconstruction SNR in dB; +inf when the error is exactly zero.
template <typename S>
S snr_db(const Vector<S>& x_true, const Vector<S>& x_hat) {
  if (x_true.size() != x_hat.size()) throw std::invalid_argument("snr_db: length mismatch");
  const S ref = x_true.squaredNorm();
  if (ref == S(0)) throw std::invalid_argument("snr_db: zero reference signal");
  const S err = (x_true - x_hat).squaredNorm();
  if (err == S(0)) return std::numeric_limits<S>::infinity();
  return S(10) * std::log10(ref / err);
}

/// A fully generated synthetic instance.
template <typename S = double>
struct SyntheticProblem {
  SyntheticProblemSpec spec;
  Vector<S> x_true;
  SensingMatrix<S> U;
  Vector<S> q_clean;
  Vector<S> q_noisy;
  SaturatedObservations<S> obs;
};

/// Full pipeline: signal, matrix, noise (exact energy ratio), thresholds from
/// the noisy measurements, then clipping. Pure function of the spec.
template <typename S = double>
SyntheticProblem<S> make_problem(const SyntheticProblemSpec& spec) {
  spec.validate();
  SyntheticProblem<S> pr;
  pr.spec = spec;
  pr.x_true = generate_true_signal<S>(spec);
  pr.U = generate_sensing_matrix<S>(spec);
  pr.q_clean = pr.U.apply(pr.x_true);
  NoiseModel<S> noise;
  if (spec.s_n > 0) {
    noise.kind = NoiseModel<S>::Kind::gaussian;
    noise.target_ratio = static_cast<S>(spec.s_n);
  }
  RandomStream nstream(spec.seed, StreamTag::noise);
  pr.q_noisy = pr.q_clean + noise.realize(pr.q_clean, nstream);
  const auto [lo, hi] = choose_saturation_levels(pr.q_noisy, spec.n);
  pr.obs = saturate_measurements(pr.q_noisy, lo, hi);
  return pr;
}

}  // namespace m1bit
