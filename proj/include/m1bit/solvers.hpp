// ADMM solvers for the mixed one-bit models, the FISTA x-subproblem, and the
// lasso / RDCS baselines.
//
// Saturation bookkeeping: a measurement with label y_i (+1 upper, -1 lower)
// and threshold s_i is consistent when y_i*(u_i'x - s_i) >= 0. The slack used
// throughout is e_i = y_i*(s_i - u_i'x); the pinball penalty lambda*L_tau(e_i)
// puts slope 1 on violations (e > 0) and slope |tau| on the consistent side.
#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "m1bit/core.hpp"
#include "m1bit/prox.hpp"
#include "m1bit/sensing.hpp"

namespace m1bit {

struct Hyperparams {
  double tau = 0.0;
  double lambda = 0.0;
  double gamma = 1e-4;
};

/// Heuristic defaults: tau = -n/(5m), lambda = m/(100n), gamma = 1e-4.
/// n = 0 disables the one-bit terms (tau = lambda = 0).
inline Hyperparams default_hyperparams(Index m, Index n) {
  if (m < 1) throw std::invalid_argument("default_hyperparams: m must be >= 1");
  Hyperparams h;
  if (n >= 1) {
    h.tau = -static_cast<double>(n) / (5.0 * static_cast<double>(m));
    h.lambda = static_cast<double>(m) / (100.0 * static_cast<double>(n));
  }
  return h;
}

template <typename S>
struct SolverParams {
  S mu = S(1e-2);        // l1 (or TV) weight
  S lambda = S(0);       // one-bit weight
  S gamma = S(1e-4);     // l2 weight (CSR only)
  S c = S(1);            // ball radius (CSC only)
  S tau = S(0);          // pinball slope, in [-1, 0]
  S theta1 = S(1);       // AL penalty, saturation split
  S theta2 = S(1);       // AL penalty, z split
  S tol_primal = S(1e-6);
  S tol_dual = S(1e-6);
  int max_outer = 2000;
  int fista_iters = 50;
  std::ostream* trace = nullptr;  // CSV: iter,objective,primal_e,primal_z,dual,wall_time

  void validate() const {
    if (mu < S(0) || lambda < S(0) || gamma < S(0)) throw std::invalid_argument("SolverParams: negative weight");
    if (!(theta1 > S(0)) || !(theta2 > S(0))) throw std::invalid_argument("SolverParams: theta must be positive");
    if (!(c > S(0))) throw std::invalid_argument("SolverParams: c must be positive");
    if (tau < S(-1) || tau > S(0)) throw std::invalid_argument("SolverParams: tau outside [-1, 0]");
    if (max_outer < 1 || fista_iters < 1) throw std::invalid_argument("SolverParams: iteration caps must be >= 1");
  }
};

template <typename S>
struct AdmmState {
  Vector<S> x, e, z, alpha, beta;
  int iter = 0;
  S primal_e = std::numeric_limits<S>::infinity();
  S primal_z = std::numeric_limits<S>::infinity();
  S dual = std::numeric_limits<S>::infinity();
};

template <typename S>
struct Solution {
  Vector<S> x_hat;
  S objective = S(0);
  int iters = 0;
  bool converged = false;
  double wall_time = 0.0;
};

// ---------------------------------------------------------------------------
// x-subproblem: smooth part of the generalized per-iteration problem
//   1/2 sum_{psi=0} (r_i - p_i)^2 + theta1/2 sum_{psi=1} (g_i + y_i r_i)^2
//     + theta2/2 |x - anchor|^2,          r = A x,
// with g_i = e_i + alpha_i/theta1 - y_i s_i held fixed.
// ---------------------------------------------------------------------------
template <typename S, typename Op>
struct XSubproblem {
  const Op& A;
  const SaturatedObservations<S>& obs;
  Vector<S> g;       // saturated-row offsets (zero on analog rows)
  Vector<S> anchor;  // z - beta/theta2 (empty when theta2 == 0)
  S theta1 = S(1);
  S theta2 = S(1);

  XSubproblem(const Op& a, const SaturatedObservations<S>& o) : A(a), obs(o) {}

  S value(const Vector<S>& x, const Vector<S>& r) const {
    S v = S(0);
    for (Index i = 0; i < r.size(); ++i) {
      if (obs.psi[i]) {
        const S t = g[i] + obs.y[i] * r[i];
        v += S(0.5) * theta1 * t * t;
      } else {
        const S t = r[i] - obs.p[i];
        v += S(0.5) * t * t;
      }
    }
    if (theta2 > S(0)) v += S(0.5) * theta2 * (x - anchor).squaredNorm();
    return v;
  }

  /// d(value)/dr as a length-m weight vector; grad = A'weights + theta2*(x-anchor).
  Vector<S> residual_weights(const Vector<S>& r) const {
    Vector<S> w(r.size());
    for (Index i = 0; i < r.size(); ++i)
      w[i] = obs.psi[i] ? theta1 * (r[i] + obs.y[i] * g[i]) : r[i] - obs.p[i];
    return w;
  }

  Vector<S> grad(const Vector<S>& x, const Vector<S>& r) const {
    Vector<S> gr = A.adjoint(residual_weights(r));
    if (theta2 > S(0)) gr += theta2 * (x - anchor);
    return gr;
  }

  /// Largest curvature of the quadratic, by power iteration on
  /// v -> A'D A v + theta2 v with D = diag(1 on analog rows, theta1 on
  /// saturated rows). Deterministic start, slight overestimate for safety.
  S curvature(int power_iters = 60) const {
    const Index d = A.cols();
    Vector<S> v = Vector<S>::Constant(d, S(1) / std::sqrt(static_cast<S>(d)));
    S lam = S(0);
    for (int k = 0; k < power_iters; ++k) {
      Vector<S> av = A.apply(v);
      for (Index i = 0; i < av.size(); ++i) av[i] *= obs.psi[i] ? theta1 : S(1);
      Vector<S> qv = A.adjoint(av) + theta2 * v;
      lam = qv.norm();
      if (lam <= S(0)) return S(0);
      v = qv / lam;
    }
    return lam * S(1.02);
  }
};

/// l1 regularizer policy for the x-subproblem.
template <typename S>
struct L1Reg {
  S mu = S(0);
  S value(const Vector<S>& x) const { return mu * x.template lpNorm<1>(); }
  Vector<S> prox(const Vector<S>& v, S step) const { return soft_threshold(v, mu * step); }
};

/// Momentum state carried across fista_solve calls. Reusing it lets an outer
/// loop whose subproblem changes slowly keep the accelerated trajectory
/// instead of restarting every call.
template <typename S>
struct FistaMomentum {
  Vector<S> xm1, axm1;
  S t = S(1);
  bool valid = false;
};

/// FISTA on min_x reg(x) + sub.value(x). Warm-started at x0. Monotone: any
/// accelerated step that would increase the objective is replaced by a plain
/// proximal-gradient step from the previous iterate (with momentum restart),
/// so the objective never increases. Returns x; optionally its image Ax and
/// final objective through the out-parameters.
template <typename S, typename Op, typename Reg>
Vector<S> fista_solve(const XSubproblem<S, Op>& sub, const Reg& reg, Vector<S> x0,
                      int iters, Vector<S>* ax_out = nullptr, S* obj_out = nullptr,
                      S curvature_hint = S(-1), FistaMomentum<S>* mom = nullptr) {
  // The quadratic is fixed by (psi, theta1, theta2); callers that solve
  // repeated instances pass the curvature once instead of re-estimating.
  const S L = curvature_hint >= S(0) ? curvature_hint : sub.curvature();
  if (L <= S(0)) {
    // Degenerate quadratic: single unit-step prox step from the origin.
    const Index d = sub.A.cols();
    Vector<S> zero = Vector<S>::Zero(d);
    Vector<S> g0 = sub.grad(zero, sub.A.apply(zero));
    Vector<S> x = reg.prox(-g0, S(1));
    if (ax_out) *ax_out = sub.A.apply(x);
    if (obj_out) *obj_out = sub.value(x, ax_out ? *ax_out : sub.A.apply(x)) + reg.value(x);
    return x;
  }
  const S step = S(1) / L;

  Vector<S> x = std::move(x0);
  Vector<S> ax = sub.A.apply(x);
  S fx = sub.value(x, ax) + reg.value(x);
  Vector<S> xm1, axm1;
  S t = S(1);
  if (mom && mom->valid) {
    xm1 = std::move(mom->xm1);
    axm1 = std::move(mom->axm1);
    t = mom->t;
  } else {
    xm1 = x;
    axm1 = ax;
  }

  for (int k = 0; k < iters; ++k) {
    const S t_next = (S(1) + std::sqrt(S(1) + S(4) * t * t)) / S(2);
    const S om = (t - S(1)) / t_next;
    Vector<S> y = x + om * (x - xm1);
    Vector<S> ay = ax + om * (ax - axm1);
    Vector<S> gy = sub.grad(y, ay);
    Vector<S> xn = reg.prox(y - step * gy, step);
    Vector<S> axn = sub.A.apply(xn);
    S fn = sub.value(xn, axn) + reg.value(xn);
    if (fn > fx) {
      // Fallback: plain prox-gradient from x (guaranteed non-increasing).
      Vector<S> gx = sub.grad(x, ax);
      xn = reg.prox(x - step * gx, step);
      axn = sub.A.apply(xn);
      fn = sub.value(xn, axn) + reg.value(xn);
      t = S(1);
    } else {
      t = t_next;
    }
    xm1 = std::move(x);
    axm1 = std::move(ax);
    x = std::move(xn);
    ax = std::move(axn);
    fx = fn;
  }
  if (mom) {
    mom->xm1 = std::move(xm1);
    mom->axm1 = std::move(axm1);
    mom->t = t;
    mom->valid = true;
  }
  if (ax_out) *ax_out = std::move(ax);
  if (obj_out) *obj_out = fx;
  return x;
}

/// Spec-facing wrapper: solves the generalized x-subproblem (quadratic + l1).
template <typename S, typename Op>
Vector<S> fista_x_subproblem(const Op& A, const SaturatedObservations<S>& obs,
                             const Vector<S>& e, const Vector<S>& z,
                             const Vector<S>& alpha, const Vector<S>& beta,
                             const SolverParams<S>& params, const Vector<S>& x0) {
  XSubproblem<S, Op> sub(A, obs);
  sub.theta1 = params.theta1;
  sub.theta2 = params.theta2;
  sub.g.setZero(obs.size());
  for (Index i = 0; i < obs.size(); ++i)
    if (obs.psi[i]) sub.g[i] = e[i] + alpha[i] / params.theta1 - obs.y[i] * obs.s[i];
  if (params.theta2 > S(0)) sub.anchor = z - beta / params.theta2;
  L1Reg<S> reg{params.mu};
  return fista_solve(sub, reg, x0, params.fista_iters);
}

// ---------------------------------------------------------------------------
// ADMM core (Gauss-Seidel order e, z, x, alpha, beta)
// ---------------------------------------------------------------------------
enum class ZStepKind { ball, ridge, free_ball };

template <typename S, typename Op, typename Reg, typename Obj>
Solution<S> admm_m1bit(const Op& A, const SaturatedObservations<S>& obs,
                       const SolverParams<S>& params, const Reg& reg, ZStepKind zkind,
                       const Obj& objective, AdmmState<S>* state_out = nullptr,
                       const Vector<S>* x_init = nullptr) {
  params.validate();
  const auto t_start = std::chrono::steady_clock::now();
  const Index d = A.cols();
  const Index m = A.rows();
  if (obs.size() != m) throw std::invalid_argument("admm_m1bit: observation/operator size mismatch");

  AdmmState<S> st;
  st.x = x_init ? *x_init : Vector<S>::Zero(d);
  st.z = st.x;
  st.beta = Vector<S>::Zero(d);
  st.e = Vector<S>::Zero(m);
  st.alpha = Vector<S>::Zero(m);

  const Index n_sat = obs.saturated_count();
  const S eps_e = params.tol_primal * std::sqrt(static_cast<S>(std::max<Index>(n_sat, 1)));
  const S eps_z = params.tol_primal * std::sqrt(static_cast<S>(d));
  const S eps_d = params.tol_dual * std::sqrt(static_cast<S>(d));

  Vector<S> r = A.apply(st.x);
  XSubproblem<S, Op> sub(A, obs);
  sub.theta1 = params.theta1;
  sub.theta2 = params.theta2;
  sub.g.setZero(m);
  const S curvature = sub.curvature();
  FistaMomentum<S> momentum;

  bool converged = false;
  for (st.iter = 1; st.iter <= params.max_outer; ++st.iter) {
    Vector<S> e_old = st.e;
    Vector<S> z_old = st.z;

    // e-step: pinball shrinkage on the saturation slack.
    if (n_sat > 0 && params.lambda > S(0)) {
      const S rho = params.lambda / params.theta1;
      for (Index i = 0; i < m; ++i)
        if (obs.psi[i])
          st.e[i] = pinball_shrink(obs.y[i] * (obs.s[i] - r[i]) - st.alpha[i] / params.theta1,
                                   rho, params.tau);
    } else if (n_sat > 0) {
      for (Index i = 0; i < m; ++i)
        if (obs.psi[i]) st.e[i] = obs.y[i] * (obs.s[i] - r[i]) - st.alpha[i] / params.theta1;
    }

    // z-step.
    switch (zkind) {
      case ZStepKind::ball:
        st.z = project_l2_ball((st.x - st.beta / params.theta2).eval(), params.c);
        break;
      case ZStepKind::ridge:
        st.z = shrink_m1bitcsr_z(st.x, st.beta, params.theta2, params.gamma);
        break;
      case ZStepKind::free_ball:
        st.z = st.x - st.beta / params.theta2;
        break;
    }

    // x-step via warm-started FISTA. With the multiplier convention of the
    // z-step and beta-update above, the quadratic coupling term is
    // (theta2/2) |x - (z + beta/theta2)|^2.
    for (Index i = 0; i < m; ++i)
      sub.g[i] = obs.psi[i] ? st.e[i] + st.alpha[i] / params.theta1 - obs.y[i] * obs.s[i] : S(0);
    sub.anchor = st.z + st.beta / params.theta2;
    st.x = fista_solve(sub, reg, std::move(st.x), params.fista_iters, &r,
                       static_cast<S*>(nullptr), curvature, &momentum);

    // Dual updates.
    st.primal_e = S(0);
    for (Index i = 0; i < m; ++i) {
      if (!obs.psi[i]) continue;
      const S resid = st.e[i] - obs.y[i] * (obs.s[i] - r[i]);
      st.alpha[i] += params.theta1 * resid;
      st.primal_e += resid * resid;
    }
    st.primal_e = std::sqrt(st.primal_e);
    st.beta += params.theta2 * (st.z - st.x);
    st.primal_z = (st.z - st.x).norm();
    st.dual = std::max(params.theta1 * (st.e - e_old).norm(), params.theta2 * (st.z - z_old).norm());

    if (params.trace) {
      const double tsec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
      *params.trace << st.iter << ',' << objective(st.x, r) << ',' << st.primal_e << ','
                    << st.primal_z << ',' << st.dual << ',' << tsec << '\n';
    }
    if (st.primal_e < eps_e && st.primal_z < eps_z && st.dual < eps_d) {
      converged = true;
      break;
    }
  }

  Solution<S> sol;
  sol.converged = converged;
  sol.iters = std::min(st.iter, params.max_outer);
  sol.x_hat = st.x;
  sol.objective = objective(st.x, r);
  sol.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  if (state_out) *state_out = std::move(st);
  return sol;
}

// ---------------------------------------------------------------------------
// Model objectives (used for Solution.objective, traces, and certificates)
// ---------------------------------------------------------------------------
enum class ModelKind { csc, csr, lasso, rdcs };

template <typename S>
S data_objective(ModelKind kind, const SaturatedObservations<S>& obs, const Vector<S>& r,
                 const SolverParams<S>& params) {
  S v = S(0);
  for (Index i = 0; i < r.size(); ++i) {
    if (obs.psi[i]) {
      if (kind == ModelKind::csc || kind == ModelKind::csr)
        v += params.lambda * pinball_loss(obs.y[i] * (obs.s[i] - r[i]), params.tau);
      // lasso ignores saturated rows; rdcs treats them as hard constraints.
    } else {
      const S t = r[i] - obs.p[i];
      v += S(0.5) * t * t;
    }
  }
  return v;
}

template <typename S>
S model_objective(ModelKind kind, const SaturatedObservations<S>& obs, const Vector<S>& x,
                  const Vector<S>& r, const SolverParams<S>& params) {
  S v = params.mu * x.template lpNorm<1>() + data_objective(kind, obs, r, params);
  if (kind == ModelKind::csr) v += S(0.5) * params.gamma * x.squaredNorm();
  return v;
}

/// Max constraint violation of y_i (u_i'x - s_i) >= 0 over saturated rows.
template <typename S>
S rdcs_violation(const SaturatedObservations<S>& obs, const Vector<S>& r) {
  S worst = S(0);
  for (Index i = 0; i < r.size(); ++i)
    if (obs.psi[i]) worst = std::max(worst, -(obs.y[i] * (r[i] - obs.s[i])));
  return std::max(worst, S(0));
}

// ---------------------------------------------------------------------------
// Model wrappers
// ---------------------------------------------------------------------------
template <typename S, typename Op>
Solution<S> solve_m1bitcsc(const Op& A, const SaturatedObservations<S>& obs,
                           const SolverParams<S>& params, AdmmState<S>* state_out = nullptr,
                           const Vector<S>* x_init = nullptr) {
  L1Reg<S> reg{params.mu};
  auto obj = [&](const Vector<S>& x, const Vector<S>& r) {
    return model_objective(ModelKind::csc, obs, x, r, params);
  };
  Solution<S> sol = admm_m1bit(A, obs, params, reg, ZStepKind::ball, obj, state_out, x_init);
  if (sol.x_hat.norm() > params.c) {  // feasibility rounding
    sol.x_hat = project_l2_ball(sol.x_hat, params.c);
    sol.objective = obj(sol.x_hat, A.apply(sol.x_hat));
  }
  return sol;
}

template <typename S, typename Op>
Solution<S> solve_m1bitcsr(const Op& A, const SaturatedObservations<S>& obs,
                           const SolverParams<S>& params, AdmmState<S>* state_out = nullptr,
                           const Vector<S>* x_init = nullptr) {
  L1Reg<S> reg{params.mu};
  auto obj = [&](const Vector<S>& x, const Vector<S>& r) {
    return model_objective(ModelKind::csr, obs, x, r, params);
  };
  return admm_m1bit(A, obs, params, reg, ZStepKind::ridge, obj, state_out, x_init);
}

/// Lasso on unsaturated rows only (pass the psi=0 rows of U and p).
template <typename S, typename Op>
Solution<S> solve_lasso(const Op& A, const Vector<S>& p_unsaturated, S mu,
                        SolverParams<S> params, AdmmState<S>* state_out = nullptr) {
  params.mu = mu;
  params.lambda = S(0);
  SaturatedObservations<S> obs;
  obs.p = p_unsaturated;
  obs.psi = ArrayXb::Constant(p_unsaturated.size(), false);
  obs.y = Vector<S>::Zero(p_unsaturated.size());
  obs.s = Vector<S>::Zero(p_unsaturated.size());
  L1Reg<S> reg{params.mu};
  auto obj = [&](const Vector<S>& x, const Vector<S>& r) {
    return model_objective(ModelKind::lasso, obs, x, r, params);
  };
  return admm_m1bit(A, obs, params, reg, ZStepKind::free_ball, obj, state_out);
}

/// RDCS as the large-lambda, tau = 0, c = inf limit of the mixed model.
/// Reported objective is the constrained model's; convergence additionally
/// requires constraint violation <= 1e-4 in the infinity norm.
template <typename S, typename Op>
Solution<S> solve_rdcs(const Op& A, const SaturatedObservations<S>& obs, S mu,
                       SolverParams<S> params, AdmmState<S>* state_out = nullptr) {
  params.mu = mu;
  params.tau = S(0);
  const Index n_sat = obs.saturated_count();
  const Hyperparams h = default_hyperparams(A.rows(), std::max<Index>(n_sat, 1));
  params.lambda = n_sat > 0 ? S(1e6) * static_cast<S>(h.lambda) : S(0);
  L1Reg<S> reg{params.mu};
  auto obj = [&](const Vector<S>& x, const Vector<S>& r) {
    return model_objective(ModelKind::rdcs, obs, x, r, params);
  };
  Solution<S> sol = admm_m1bit(A, obs, params, reg, ZStepKind::free_ball, obj, state_out);
  if (rdcs_violation(obs, A.apply(sol.x_hat)) > S(1e-4)) sol.converged = false;
  return sol;
}

}  // namespace m1bit
