// Detector overexposure model: per-view dynamic thresholds from a fixed
// measurable range, with saturated observations zeroed. HU error metric.
#pragma once

#include <cmath>
#include <stdexcept>

#include "m1bit/core.hpp"
#include "m1bit/ct/geometry.hpp"
#include "m1bit/sensing.hpp"

namespace m1bit::ct {

struct OverexposedSinogram {
  MatrixXd p;        // observed sinogram (saturated entries set to 0)
  VectorXd s_beta;   // per-view threshold s_b = max(p_max(view) - kappa, 0)
  SaturatedObservations<double> obs;  // flattened view-major, y = -1 on flagged rays
};

/// Applies the dynamic-range model: in view b, entries at or below
/// s_b = max(p_max - kappa, 0) are recorded as zero and flagged as
/// lower-saturated one-bit measurements.
inline OverexposedSinogram apply_overexposure(const MatrixXd& sino, double kappa) {
  if (!(kappa > 0)) throw std::invalid_argument("apply_overexposure: kappa must be positive");
  const Index nv = sino.rows(), nb = sino.cols();
  OverexposedSinogram out;
  out.p.resize(nv, nb);
  out.s_beta.resize(nv);
  out.obs.p.resize(nv * nb);
  out.obs.psi.resize(nv * nb);
  out.obs.y = VectorXd::Zero(nv * nb);
  out.obs.s.resize(nv * nb);
  for (Index v = 0; v < nv; ++v) {
    const double s_b = std::max(sino.row(v).maxCoeff() - kappa, 0.0);
    out.s_beta[v] = s_b;
    for (Index b = 0; b < nb; ++b) {
      const Index i = v * nb + b;
      const double q = sino(v, b);
      const bool flagged = q <= s_b;
      out.p(v, b) = flagged ? 0.0 : q;
      out.obs.p[i] = out.p(v, b);
      out.obs.psi[i] = flagged;
      out.obs.y[i] = flagged ? -1.0 : 0.0;
      out.obs.s[i] = s_b;
    }
  }
  return out;
}

/// The indicator an oracle would assign: truly saturated rays are those whose
/// clean value is positive but at or below the view threshold (exact zeros
/// are valid analog measurements).
inline ArrayXb ideal_saturation_indicator(const MatrixXd& clean_sino, const VectorXd& s_beta) {
  const Index nv = clean_sino.rows(), nb = clean_sino.cols();
  if (s_beta.size() != nv) throw std::invalid_argument("ideal_saturation_indicator: threshold size");
  ArrayXb psi(nv * nb);
  for (Index v = 0; v < nv; ++v)
    for (Index b = 0; b < nb; ++b)
      psi[v * nb + b] = clean_sino(v, b) > 0.0 && clean_sino(v, b) <= s_beta[v];
  return psi;
}

/// Root-mean-square error in Hounsfield units, HU = 1000*(mu - mu_w)/mu_w.
inline double rmse_hu(const MatrixXd& img_true, const MatrixXd& img_hat, double mu_water = 0.02) {
  if (img_true.rows() != img_hat.rows() || img_true.cols() != img_hat.cols())
    throw std::invalid_argument("rmse_hu: grid mismatch");
  if (!(mu_water > 0)) throw std::invalid_argument("rmse_hu: mu_water must be positive");
  const double scale = 1000.0 / mu_water;
  const double mse = (img_true - img_hat).squaredNorm() / static_cast<double>(img_true.size());
  return scale * std::sqrt(mse);
}

}  // namespace m1bit::ct
