// Closed-form proximal operators and losses shared by all solvers.
#pragma once

#include <cmath>
#include <stdexcept>

#include "m1bit/core.hpp"

namespace m1bit {

// Pinball loss with slopes (1, tau), tau in [-1, 0]:
//   L_tau(t) = t      for t >= 0
//            = tau*t  for t <  0   (nonnegative since tau <= 0)
// tau = 0 gives the one-sided hinge max(t, 0); tau = -1 gives |t|.
template <typename S>
S pinball_loss(S t, S tau) {
  if (tau < S(-1) || tau > S(0)) throw std::invalid_argument("pinball_loss: tau outside [-1, 0]");
  return t >= S(0) ? t : tau * t;
}

// Shrinkage operator for the pinball loss: argmin_e rho*L_tau(e) + (e-t)^2/2.
template <typename S>
S pinball_shrink(S t, S rho, S tau) {
  if (!(rho > S(0))) throw std::invalid_argument("pinball_shrink: rho must be positive");
  if (tau < S(-1) || tau > S(0)) throw std::invalid_argument("pinball_shrink: tau outside [-1, 0]");
  if (t >= rho) return t - rho;
  if (t <= tau * rho) return t - tau * rho;
  return S(0);
}

/// Euclidean projection onto the l2 ball of radius c.
template <typename Derived>
typename Derived::PlainObject project_l2_ball(const Eigen::MatrixBase<Derived>& v,
                                              typename Derived::Scalar c) {
  using S = typename Derived::Scalar;
  if (!(c > S(0))) throw std::invalid_argument("project_l2_ball: c must be positive");
  const S nrm = v.norm();
  if (nrm <= c) return v;
  return (c / nrm) * v;
}

/// Componentwise soft threshold sign(v)*max(|v|-mu, 0); the l1 prox.
template <typename Derived>
typename Derived::PlainObject soft_threshold(const Eigen::MatrixBase<Derived>& v,
                                             typename Derived::Scalar mu) {
  using S = typename Derived::Scalar;
  if (mu < S(0)) throw std::invalid_argument("soft_threshold: mu must be nonnegative");
  return (v.array().sign() * (v.array().abs() - mu).max(S(0))).matrix();
}

/// z-update of the l2-regularized model: argmin_z gamma/2 |z|^2 + beta'z + theta2/2 |z-x|^2.
template <typename DerivedX, typename DerivedB>
typename DerivedX::PlainObject shrink_m1bitcsr_z(const Eigen::MatrixBase<DerivedX>& x,
                                                 const Eigen::MatrixBase<DerivedB>& beta,
                                                 typename DerivedX::Scalar theta2,
                                                 typename DerivedX::Scalar gamma) {
  using S = typename DerivedX::Scalar;
  if (!(theta2 > S(0))) throw std::invalid_argument("shrink_m1bitcsr_z: theta2 must be positive");
  if (gamma < S(0)) throw std::invalid_argument("shrink_m1bitcsr_z: gamma must be nonnegative");
  return (theta2 * x - beta) / (theta2 + gamma);
}

}  // namespace m1bit
