// Discrete isotropic total variation (reflexive boundary) and its prox.
#pragma once

#include <limits>
#include <stdexcept>

#include "m1bit/core.hpp"

namespace m1bit {

// Forward differences with zero gradient across the last row/column
// (reflexive boundary). div below is the negative adjoint of (gx, gy).
template <typename S>
void image_gradient(const Matrix<S>& u, Matrix<S>& gx, Matrix<S>& gy) {
  const Index r = u.rows(), c = u.cols();
  gx.setZero(r, c);
  gy.setZero(r, c);
  if (c > 1) gx.leftCols(c - 1) = u.rightCols(c - 1) - u.leftCols(c - 1);
  if (r > 1) gy.topRows(r - 1) = u.bottomRows(r - 1) - u.topRows(r - 1);
}

template <typename S>
Matrix<S> image_divergence(const Matrix<S>& px, const Matrix<S>& py) {
  const Index r = px.rows(), c = px.cols();
  Matrix<S> d = Matrix<S>::Zero(r, c);
  // Each px(i,j), j < c-1, contributes +1 at (i,j) and -1 at (i,j+1); the
  // last column carries no flux (matches the zeroed boundary gradient).
  if (c > 1) {
    d.leftCols(c - 1) += px.leftCols(c - 1);
    d.rightCols(c - 1) -= px.leftCols(c - 1);
  }
  if (r > 1) {
    d.topRows(r - 1) += py.topRows(r - 1);
    d.bottomRows(r - 1) -= py.topRows(r - 1);
  }
  return d;
}

/// Isotropic TV value: sum over pixels of sqrt(gx^2 + gy^2).
template <typename S>
S tv_value(const Matrix<S>& u) {
  Matrix<S> gx, gy;
  image_gradient(u, gx, gy);
  return (gx.array().square() + gy.array().square()).sqrt().sum();
}

/// Approximate prox of weight*TV at img: argmin_u weight*TV(u) + 1/2 |u-img|^2,
/// by Chambolle's dual fixed-point iteration (step 1/8) with a monotone
/// safeguard: the returned image is the best-objective iterate, so the
/// objective trace is non-increasing. If duality_gap is non-null it receives
/// the gap of the returned iterate. inner_iters = 0 returns img unchanged.
template <typename S>
Matrix<S> tv_prox(const Matrix<S>& img, S weight, int inner_iters,
                  S* duality_gap = nullptr) {
  if (!(weight > S(0))) throw std::invalid_argument("tv_prox: weight must be positive");
  if (inner_iters <= 0) {
    if (duality_gap) *duality_gap = std::numeric_limits<S>::quiet_NaN();
    return img;
  }
  const Index r = img.rows(), c = img.cols();
  Matrix<S> px = Matrix<S>::Zero(r, c), py = Matrix<S>::Zero(r, c);
  Matrix<S> gx, gy;

  const S step = S(1) / S(8);  // stability bound for the 2-D forward-difference gradient
  Matrix<S> best = img;
  S best_obj = weight * tv_value(img);  // objective at u = img (quadratic term 0)
  S best_gap = best_obj;                // gap of the valid dual pair (u = img, p = 0)

  for (int k = 0; k < inner_iters; ++k) {
    // Dual ascent step on p.
    Matrix<S> core = image_divergence(px, py) - img / weight;
    image_gradient(core, gx, gy);
    Matrix<S> denom = (S(1) + step * (gx.array().square() + gy.array().square()).sqrt()).matrix();
    px = ((px + step * gx).array() / denom.array()).matrix();
    py = ((py + step * gy).array() / denom.array()).matrix();

    // Primal iterate and its objective / duality gap.
    Matrix<S> u = img - weight * image_divergence(px, py);
    Matrix<S> ux, uy;
    image_gradient(u, ux, uy);
    const S tv_u = (ux.array().square() + uy.array().square()).sqrt().sum();
    const S obj = weight * tv_u + S(0.5) * (u - img).squaredNorm();
    if (obj < best_obj) {
      best_obj = obj;
      best = u;
      // Gap of the pair (u, p) with u = img - weight*div(p): the optimal dual
      // field anti-aligns with the gradient, so the inner product enters with
      // a plus sign.
      best_gap = weight * (tv_u + (px.array() * ux.array() + py.array() * uy.array()).sum());
    }
  }
  if (duality_gap) *duality_gap = best_gap;
  return best;
}

}  // namespace m1bit
