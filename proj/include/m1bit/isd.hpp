// Iterative saturation detection for lower-saturated non-negative sensing
// systems, generic over the reconstruction method.
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "m1bit/core.hpp"
#include "m1bit/sensing.hpp"

namespace m1bit {

template <typename S>
struct IsdConfig {
  Vector<S> s_minus;          // per-measurement lower thresholds
  S detect_fraction = S(10);  // relabel as zero when q_tilde <= s_minus / detect_fraction
  int max_rounds = 10;
  bool warm_start = true;     // reuse the previous round's reconstruction as init

  // Reconstructor: (observations with current psi, optional warm start) -> x.
  std::function<Vector<S>(const SaturatedObservations<S>&, const Vector<S>*)> reconstructor;
  // Forward map q = U'x of the sensing system.
  std::function<Vector<S>(const Vector<S>&)> apply;
  // Optional reconstruction-quality metric recorded per round (e.g. RMSE).
  std::function<S(const Vector<S>&)> metric;

  void validate() const {
    if (!(detect_fraction > S(0))) throw std::invalid_argument("IsdConfig: detect_fraction must be positive");
    if (max_rounds < 1) throw std::invalid_argument("IsdConfig: max_rounds must be >= 1");
    if (!reconstructor || !apply) throw std::invalid_argument("IsdConfig: reconstructor and apply are required");
  }
};

template <typename S>
struct IsdRound {
  ArrayXb psi;
  int flips = 0;
  S metric = std::numeric_limits<S>::quiet_NaN();
};

template <typename S>
struct IsdHistory {
  std::vector<IsdRound<S>> rounds;
  bool converged = false;
  bool cycle_detected = false;
};

template <typename S>
struct IsdResult {
  Vector<S> x_hat;
  ArrayXb psi;
  IsdHistory<S> history;
};

/// Runs the detection loop: flag everything at/below the threshold, then
/// alternate reconstruction with relabeling (a flagged entry whose predicted
/// measurement is at most s_minus/detect_fraction becomes an analog zero)
/// until psi stops changing, a cycle repeats, or max_rounds is hit.
template <typename S>
IsdResult<S> run_isd(const SaturatedObservations<S>& obs0, const IsdConfig<S>& cfg) {
  cfg.validate();
  const Index m = obs0.size();
  if (cfg.s_minus.size() != m) throw std::invalid_argument("run_isd: s_minus length mismatch");

  // Candidate set: entries at/below the lower threshold. Only these may flip.
  ArrayXb candidate(m);
  for (Index i = 0; i < m; ++i) candidate[i] = obs0.p[i] <= cfg.s_minus[i];

  SaturatedObservations<S> obs = obs0;
  obs.y = Vector<S>::Zero(m);
  obs.s = cfg.s_minus;
  for (Index i = 0; i < m; ++i) {
    if (candidate[i]) {
      obs.psi[i] = true;   // step 1: initial guess marks all candidates saturated
      obs.y[i] = S(-1);
      obs.p[i] = S(0);
    } else {
      obs.psi[i] = false;
    }
  }

  IsdResult<S> res;
  res.history.converged = false;
  std::vector<std::uint64_t> seen_hashes;
  seen_hashes.push_back(fnv1a(obs.psi.data(), static_cast<std::size_t>(m) * sizeof(bool)));
  Vector<S> x;
  bool have_x = false;

  for (int round = 0; round < cfg.max_rounds; ++round) {
    x = cfg.reconstructor(obs, (cfg.warm_start && have_x) ? &x : nullptr);
    have_x = true;
    const Vector<S> q_tilde = cfg.apply(x);

    // Step 4/5: relabel candidates by the predicted measurement magnitude.
    int flips = 0;
    for (Index i = 0; i < m; ++i) {
      if (!candidate[i]) continue;
      const bool saturated = q_tilde[i] > cfg.s_minus[i] / cfg.detect_fraction;
      if (saturated != obs.psi[i]) ++flips;
      obs.psi[i] = saturated;
      obs.y[i] = saturated ? S(-1) : S(0);
      obs.p[i] = S(0);  // relabeled entries are used as analog zeros
    }

    IsdRound<S> rec;
    rec.psi = obs.psi;
    rec.flips = flips;
    if (cfg.metric) rec.metric = cfg.metric(x);
    res.history.rounds.push_back(std::move(rec));

    if (flips == 0) {
      res.history.converged = true;
      break;
    }
    const std::uint64_t h =
        fnv1a(obs.psi.data(), static_cast<std::size_t>(m) * sizeof(bool));
    for (std::uint64_t prev : seen_hashes)
      if (prev == h) {
        res.history.cycle_detected = true;
        break;
      }
    if (res.history.cycle_detected) break;
    seen_hashes.push_back(h);
  }

  res.x_hat = std::move(x);
  res.psi = obs.psi;
  return res;
}

/// Counts (false detections, missing detections) between indicator vectors:
/// false = detected-but-not-true, missing = true-but-not-detected.
inline std::pair<Index, Index> compare_indicators(const ArrayXb& psi_true,
                                                  const ArrayXb& psi_detected) {
  if (psi_true.size() != psi_detected.size())
    throw std::invalid_argument("compare_indicators: length mismatch");
  Index false_det = 0, missing = 0;
  for (Index i = 0; i < psi_true.size(); ++i) {
    if (!psi_true[i] && psi_detected[i]) ++false_det;
    if (psi_true[i] && !psi_detected[i]) ++missing;
  }
  return {false_det, missing};
}

}  // namespace m1bit
