#include "doctest.h"

#include <cmath>

#include "m1bit/rng.hpp"
#include "m1bit/sensing.hpp"
#include "m1bit/solvers.hpp"
#include "oracles.hpp"

using namespace m1bit;

namespace {

SaturatedObservations<double> empty_obs(Index m) {
  SaturatedObservations<double> obs;
  obs.p = VectorXd::Zero(m);
  obs.psi = ArrayXb::Constant(m, false);
  obs.y = VectorXd::Zero(m);
  obs.s = VectorXd::Zero(m);
  return obs;
}

/// Dense mixed-model objective used as the grid/golden oracle target.
double csc_objective(const SensingMatrix<double>& U, const SaturatedObservations<double>& obs,
                     const VectorXd& x, const SolverParams<double>& prm) {
  return model_objective(ModelKind::csc, obs, x, U.apply(x), prm);
}

}  // namespace

TEST_CASE("hyperparameter heuristics") {
  auto h = default_hyperparams(500, 100);
  CHECK(h.tau == doctest::Approx(-0.04));
  CHECK(h.lambda == doctest::Approx(0.05));
  CHECK(h.gamma == doctest::Approx(1e-4));
  auto h2 = default_hyperparams(500, 500);
  CHECK(h2.tau == doctest::Approx(-0.2));
  CHECK(h2.lambda == doctest::Approx(0.01));
  auto h0 = default_hyperparams(500, 0);
  CHECK(h0.tau == 0.0);
  CHECK(h0.lambda == 0.0);
}

TEST_CASE("x-subproblem: identity system recovers p") {
  SensingMatrix<double> U;
  U.A = MatrixXd::Identity(2, 2);
  auto obs = empty_obs(2);
  obs.p << 1.5, -0.75;
  SolverParams<double> prm;
  prm.mu = 0.0;
  prm.theta2 = 1e-12;
  prm.fista_iters = 300;
  VectorXd x = fista_x_subproblem(U, obs, VectorXd::Zero(2).eval(), VectorXd::Zero(2).eval(),
                                  VectorXd::Zero(2).eval(), VectorXd::Zero(2).eval(), prm,
                                  VectorXd::Zero(2).eval());
  CHECK((x - obs.p).lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("x-subproblem matches the sign-pattern QP oracle") {
  RandomStream rng(17, StreamTag::generic);
  for (int rep = 0; rep < 5; ++rep) {
    const Index d = 2, m = 4;
    SensingMatrix<double> U;
    U.A.resize(m, d);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < d; ++j) U.A(i, j) = rng.normal();
    auto obs = empty_obs(m);
    for (Index i = 0; i < m; ++i) obs.p[i] = rng.normal();
    obs.psi[3] = true;
    obs.y[3] = rep % 2 == 0 ? 1.0 : -1.0;
    obs.s[3] = 0.3;
    VectorXd e = VectorXd::Zero(m), alpha = VectorXd::Zero(m);
    e[3] = 0.2;
    alpha[3] = -0.1;
    VectorXd z(d), beta(d);
    for (Index j = 0; j < d; ++j) {
      z[j] = rng.normal();
      beta[j] = rng.normal();
    }
    SolverParams<double> prm;
    prm.mu = 0.35;
    prm.theta1 = 1.3;
    prm.theta2 = 0.8;
    prm.fista_iters = 3000;

    VectorXd x = fista_x_subproblem(U, obs, e, z, alpha, beta, prm, VectorXd::Zero(d).eval());

    // Assemble the equivalent quadratic mu|x|_1 + 1/2 x'Qx - b'x.
    MatrixXd Q = prm.theta2 * MatrixXd::Identity(d, d);
    VectorXd b = prm.theta2 * (z - beta / prm.theta2);
    for (Index i = 0; i < m; ++i) {
      const VectorXd u = U.A.row(i).transpose();
      if (obs.psi[i]) {
        const double g = e[i] + alpha[i] / prm.theta1 - obs.y[i] * obs.s[i];
        Q += prm.theta1 * u * u.transpose();
        b -= prm.theta1 * obs.y[i] * g * u;
      } else {
        Q += u * u.transpose();
        b += obs.p[i] * u;
      }
    }
    VectorXd want = oracles::l1_quadratic_oracle(Q, b, prm.mu);
    CHECK((x - want).lpNorm<Eigen::Infinity>() <= 1e-6);
  }
}

TEST_CASE("x-subproblem: huge l1 weight zeroes the solution") {
  SensingMatrix<double> U;
  U.A = MatrixXd::Identity(3, 3);
  auto obs = empty_obs(3);
  obs.p << 1, 2, 3;
  SolverParams<double> prm;
  prm.mu = 1e6;
  VectorXd x = fista_x_subproblem(U, obs, VectorXd::Zero(3).eval(), VectorXd::Zero(3).eval(),
                                  VectorXd::Zero(3).eval(), VectorXd::Zero(3).eval(), prm,
                                  VectorXd::Ones(3).eval());
  CHECK(x.norm() == 0.0);
}

TEST_CASE("smooth part matches central finite differences") {
  RandomStream rng(23, StreamTag::generic);
  const Index d = 5, m = 8;
  SensingMatrix<double> U;
  U.A.resize(m, d);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < d; ++j) U.A(i, j) = rng.normal();
  auto obs = empty_obs(m);
  for (Index i = 0; i < m; ++i) obs.p[i] = rng.normal();
  for (Index i : {Index(1), Index(4), Index(6)}) {
    obs.psi[i] = true;
    obs.y[i] = i % 2 ? 1.0 : -1.0;
    obs.s[i] = rng.normal();
  }
  XSubproblem<double, SensingMatrix<double>> sub(U, obs);
  sub.theta1 = 1.7;
  sub.theta2 = 0.6;
  sub.g.setZero(m);
  for (Index i = 0; i < m; ++i)
    if (obs.psi[i]) sub.g[i] = rng.normal();
  sub.anchor = VectorXd::Zero(d);
  for (Index j = 0; j < d; ++j) sub.anchor[j] = rng.normal();

  for (int rep = 0; rep < 20; ++rep) {
    VectorXd x(d);
    for (Index j = 0; j < d; ++j) x[j] = rng.normal();
    VectorXd g = sub.grad(x, U.apply(x));
    const double h = 1e-6;
    for (Index j = 0; j < d; ++j) {
      VectorXd xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const double fd = (sub.value(xp, U.apply(xp)) - sub.value(xm, U.apply(xm))) / (2 * h);
      CHECK(g[j] == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("ball-constrained model: scalar least squares") {
  SensingMatrix<double> U;
  U.A = MatrixXd::Ones(1, 1);
  auto obs = empty_obs(1);
  obs.p << 1.0;
  SolverParams<double> prm;
  prm.mu = 0.0;
  prm.c = 10.0;
  auto sol = solve_m1bitcsc(U, obs, prm);
  CHECK(sol.x_hat[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(sol.converged);
}

TEST_CASE("one upper-saturated row pulls the scalar to the threshold") {
  SensingMatrix<double> U;
  U.A = MatrixXd::Ones(2, 1);
  auto obs = empty_obs(2);
  obs.p << 1.0, 0.0;
  obs.psi[1] = true;
  obs.y[1] = 1.0;
  obs.s[1] = 2.0;
  SolverParams<double> prm;
  prm.mu = 0.0;
  prm.lambda = 10.0;
  prm.tau = 0.0;
  prm.c = 10.0;
  auto sol = solve_m1bitcsc(U, obs, prm);

  auto obj1d = [&](double x) {
    VectorXd v(1);
    v << x;
    return csc_objective(U, obs, v, prm);
  };
  const double xstar = oracles::grid_then_golden(obj1d, -10.0, 10.0);
  CHECK(xstar == doctest::Approx(2.0).epsilon(1e-3));  // hinge pulls to the boundary
  CHECK(sol.x_hat[0] == doctest::Approx(xstar).epsilon(1e-3));
}

TEST_CASE("2-D mixed model matches a grid scan over the ball") {
  RandomStream rng(31, StreamTag::generic);
  SensingMatrix<double> U;
  U.A.resize(6, 2);
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 2; ++j) U.A(i, j) = rng.normal();
  VectorXd xtrue(2);
  xtrue << 0.6, -0.8;
  VectorXd q = U.apply(xtrue);
  auto [lo, hi] = choose_saturation_levels(q, Index(2));
  auto obs = saturate_measurements(q, lo, hi);
  SolverParams<double> prm;
  prm.mu = 0.05;
  prm.lambda = 0.5;
  prm.tau = -0.5;
  prm.c = 1.0;
  auto sol = solve_m1bitcsc(U, obs, prm);

  double fbest = std::numeric_limits<double>::infinity();
  const int N = 1200;
  for (int a = -N; a <= N; ++a)
    for (int b = -N; b <= N; ++b) {
      VectorXd v(2);
      v << a / static_cast<double>(N), b / static_cast<double>(N);
      if (v.norm() > 1.0) continue;
      fbest = std::min(fbest, csc_objective(U, obs, v, prm));
    }
  CHECK(sol.objective <= fbest + 1e-4);
  CHECK(sol.x_hat.norm() <= prm.c + 1e-6);
}

TEST_CASE("l2-regularized model tracks the constrained one on the scalar example") {
  SensingMatrix<double> U;
  U.A = MatrixXd::Ones(2, 1);
  auto obs = empty_obs(2);
  obs.p << 1.0, 0.0;
  obs.psi[1] = true;
  obs.y[1] = 1.0;
  obs.s[1] = 2.0;
  SolverParams<double> prm;
  prm.mu = 0.0;
  prm.lambda = 10.0;
  prm.tau = 0.0;
  prm.gamma = 1e-4;
  auto sol = solve_m1bitcsr(U, obs, prm);
  CHECK(sol.x_hat[0] == doctest::Approx(2.0).epsilon(1e-2));
}

TEST_CASE("lasso: least squares, null threshold, oracle") {
  RandomStream rng(41, StreamTag::generic);
  SensingMatrix<double> U;
  U.A.resize(3, 3);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) U.A(i, j) = rng.normal() + (i == j ? 2.0 : 0.0);
  VectorXd p(3);
  p << 1.0, -2.0, 0.5;

  SolverParams<double> prm;
  prm.fista_iters = 200;
  auto ls = solve_lasso(U, p, 0.0, prm);
  VectorXd want = U.A.fullPivLu().solve(p);
  CHECK((ls.x_hat - want).lpNorm<Eigen::Infinity>() <= 1e-5);

  const double mu_null = (U.A.transpose() * p).lpNorm<Eigen::Infinity>();
  auto null_sol = solve_lasso(U, p, mu_null * 1.0001, prm);
  CHECK(null_sol.x_hat.norm() == 0.0);

  const double mu = 0.7;
  auto sol = solve_lasso(U, p, mu, prm);
  MatrixXd Q = U.A.transpose() * U.A;
  VectorXd b = U.A.transpose() * p;
  VectorXd oracle = oracles::l1_quadratic_oracle(Q, b, mu);
  CHECK((sol.x_hat - oracle).lpNorm<Eigen::Infinity>() <= 1e-6);
}

TEST_CASE("constrained baseline: scalar boundary and lasso reduction") {
  SensingMatrix<double> U;
  U.A = MatrixXd::Ones(2, 1);
  auto obs = empty_obs(2);
  obs.p << 1.0, 0.0;
  obs.psi[1] = true;
  obs.y[1] = 1.0;  // constraint x >= 2
  obs.s[1] = 2.0;
  SolverParams<double> prm;
  auto sol = solve_rdcs(U, obs, 0.0, prm);
  CHECK(sol.x_hat[0] == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(rdcs_violation(obs, U.apply(sol.x_hat)) <= 1e-4);

  // No saturated rows: identical to lasso.
  RandomStream rng(43, StreamTag::generic);
  SensingMatrix<double> U2;
  U2.A.resize(5, 2);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 2; ++j) U2.A(i, j) = rng.normal();
  auto obs2 = empty_obs(5);
  for (Index i = 0; i < 5; ++i) obs2.p[i] = rng.normal();
  auto r1 = solve_rdcs(U2, obs2, 0.1, prm);
  auto r2 = solve_lasso(U2, obs2.p, 0.1, prm);
  CHECK((r1.x_hat - r2.x_hat).lpNorm<Eigen::Infinity>() <= 1e-5);
}

TEST_CASE("constrained baseline matches the active-set oracle in 2-D") {
  RandomStream rng(47, StreamTag::generic);
  SensingMatrix<double> U;
  U.A.resize(5, 2);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 2; ++j) U.A(i, j) = rng.normal();
  auto obs = empty_obs(5);
  for (Index i = 0; i < 4; ++i) obs.p[i] = rng.normal();
  obs.psi[4] = true;
  obs.y[4] = 1.0;
  obs.s[4] = 1.5;
  const double mu = 0.2;

  SolverParams<double> prm;
  auto sol = solve_rdcs(U, obs, mu, prm);

  // Oracle: unconstrained lasso; if infeasible, golden section on the line
  // u's x = s (single active constraint in 2-D).
  MatrixXd A0 = U.A.topRows(4);
  VectorXd p0 = obs.p.head(4);
  MatrixXd Q = A0.transpose() * A0;
  VectorXd b = A0.transpose() * p0;
  VectorXd free_min = oracles::l1_quadratic_oracle(Q, b, mu);
  const VectorXd u = U.A.row(4).transpose();
  double fstar;
  auto lasso_obj = [&](const VectorXd& v) {
    return mu * v.lpNorm<1>() + 0.5 * (A0 * v - p0).squaredNorm();
  };
  if (u.dot(free_min) >= obs.s[4]) {
    fstar = lasso_obj(free_min);
  } else {
    VectorXd xp = obs.s[4] * u / u.squaredNorm();
    VectorXd dir(2);
    dir << -u[1], u[0];
    dir.normalize();
    auto line_obj = [&](double t) { return lasso_obj(xp + t * dir); };
    const double tstar = oracles::grid_then_golden(line_obj, -20.0, 20.0, 4000);
    fstar = line_obj(tstar);
  }
  CHECK(sol.objective <= fstar + 1e-4);
  CHECK(rdcs_violation(obs, U.apply(sol.x_hat)) <= 1e-4);
}

TEST_CASE("with no saturation all four solvers agree") {
  SyntheticProblemSpec spec{40, 6, 60, 0, 0.0, 5};
  auto pr = make_problem(spec);
  const double mu = 0.05;
  SolverParams<double> prm;
  prm.mu = mu;
  prm.lambda = 0.0;
  prm.c = 1.0;

  auto csc = solve_m1bitcsc(pr.U, pr.obs, prm);
  auto csr = solve_m1bitcsr(pr.U, pr.obs, prm);
  auto lasso = solve_lasso(pr.U, pr.obs.p, mu, prm);
  auto rdcs = solve_rdcs(pr.U, pr.obs, mu, prm);
  CHECK((csc.x_hat - lasso.x_hat).lpNorm<Eigen::Infinity>() <= 1e-4);
  CHECK((csr.x_hat - lasso.x_hat).lpNorm<Eigen::Infinity>() <= 1e-4);
  CHECK((rdcs.x_hat - lasso.x_hat).lpNorm<Eigen::Infinity>() <= 1e-4);
}

TEST_CASE("admm residuals fall below tolerance on random instances") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    SyntheticProblemSpec spec{60, 10, 120, 20, 15.0, seed};
    auto pr = make_problem(spec);
    const Hyperparams h = default_hyperparams(spec.m, spec.n);
    SolverParams<double> prm;
    prm.mu = 0.02;
    prm.lambda = h.lambda;
    prm.tau = h.tau;
    prm.c = 1.0;
    AdmmState<double> st;
    auto sol = solve_m1bitcsc(pr.U, pr.obs, prm, &st);
    CHECK(sol.converged);
    CHECK(st.primal_e <= prm.tol_primal * std::sqrt(static_cast<double>(spec.n)));
    CHECK(st.primal_z <= prm.tol_primal * std::sqrt(static_cast<double>(spec.d)));
  }
}

TEST_CASE("returned minimizer survives random perturbations") {
  SyntheticProblemSpec spec{30, 5, 60, 10, 20.0, 77};
  auto pr = make_problem(spec);
  const Hyperparams h = default_hyperparams(spec.m, spec.n);
  SolverParams<double> prm;
  prm.mu = 0.05;
  prm.lambda = h.lambda;
  prm.tau = h.tau;
  prm.c = 1.0;
  auto sol = solve_m1bitcsc(pr.U, pr.obs, prm);
  const double f0 = sol.objective;
  RandomStream rng(123, StreamTag::generic);
  for (int k = 0; k < 100; ++k) {
    VectorXd delta(spec.d);
    for (Index j = 0; j < spec.d; ++j) delta[j] = rng.normal();
    delta *= 1e-3 / delta.norm();
    VectorXd xp = project_l2_ball((sol.x_hat + delta).eval(), prm.c);
    const double fp = csc_objective(pr.U, pr.obs, xp, prm);
    CHECK(fp - f0 >= -1e-6);
  }
}
