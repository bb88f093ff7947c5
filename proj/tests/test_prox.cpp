#include "doctest.h"

#include "m1bit/prox.hpp"
#include "m1bit/rng.hpp"
#include "oracles.hpp"

using m1bit::pinball_loss;
using m1bit::pinball_shrink;
using m1bit::project_l2_ball;
using m1bit::shrink_m1bitcsr_z;
using m1bit::soft_threshold;
using m1bit::VectorXd;

TEST_CASE("pinball loss branch values") {
  CHECK(pinball_loss(-3.0, 0.0) == 0.0);   // hinge: negative side free
  CHECK(pinball_loss(-2.0, -0.5) == 1.0);
  CHECK(pinball_loss(-2.0, -1.0) == 2.0);  // absolute-loss limit
  CHECK(pinball_loss(4.0, 0.0) == 4.0);
  CHECK(pinball_loss(4.0, -0.5) == 4.0);
  CHECK(pinball_loss(4.0, -1.0) == 4.0);
  CHECK(pinball_loss(0.0, -0.7) == 0.0);
  CHECK_THROWS(pinball_loss(1.0, 0.5));
  CHECK_THROWS(pinball_loss(1.0, -1.5));
}

TEST_CASE("pinball loss is convex (midpoint inequality)") {
  m1bit::RandomStream rng(42, m1bit::StreamTag::generic);
  for (int k = 0; k < 500; ++k) {
    const double tau = -rng.uniform01();
    const double a = 6.0 * (rng.uniform01() - 0.5);
    const double b = 6.0 * (rng.uniform01() - 0.5);
    const double mid = pinball_loss(0.5 * (a + b), tau);
    CHECK(mid <= 0.5 * (pinball_loss(a, tau) + pinball_loss(b, tau)) + 1e-12);
  }
}

TEST_CASE("pinball shrinkage branch values") {
  CHECK(pinball_shrink(2.0, 1.0, 0.0) == 1.0);
  CHECK(pinball_shrink(0.5, 1.0, -1.0) == 0.0);   // dead zone (-1, 1)
  CHECK(pinball_shrink(-2.0, 1.0, -0.5) == -1.5);
  CHECK_THROWS(pinball_shrink(1.0, 0.0, -0.5));
  CHECK_THROWS(pinball_shrink(1.0, -1.0, -0.5));
}

TEST_CASE("pinball shrinkage is the prox of the pinball loss") {
  m1bit::RandomStream rng(7, m1bit::StreamTag::generic);
  for (int k = 0; k < 1000; ++k) {
    const double t = 8.0 * (rng.uniform01() - 0.5);
    const double rho = 0.05 + 3.0 * rng.uniform01();
    const double tau = -rng.uniform01();
    const double got = pinball_shrink(t, rho, tau);
    auto obj = [&](double e) { return rho * pinball_loss(e, tau) + 0.5 * (e - t) * (e - t); };
    const double want = oracles::grid_then_golden(obj, t - 2 * rho - 4, t + 2 * rho + 4);
    CHECK(std::abs(got - want) <= 1e-4);
  }
}

TEST_CASE("l2 ball projection") {
  VectorXd v(2);
  v << 0.3, 0.4;
  CHECK((project_l2_ball(v, 1.0) - v).norm() == 0.0);
  v << 3.0, 4.0;
  VectorXd pv = project_l2_ball(v, 1.0);
  CHECK(pv[0] == doctest::Approx(0.6));
  CHECK(pv[1] == doctest::Approx(0.8));
  VectorXd z = VectorXd::Zero(3);
  CHECK(project_l2_ball(z, 2.0).norm() == 0.0);
  CHECK_THROWS(project_l2_ball(v, 0.0));
}

TEST_CASE("l2 ball projection is idempotent and nonexpansive") {
  m1bit::RandomStream rng(11, m1bit::StreamTag::generic);
  for (int k = 0; k < 200; ++k) {
    VectorXd a(4), b(4);
    for (int i = 0; i < 4; ++i) {
      a[i] = 4.0 * (rng.uniform01() - 0.5);
      b[i] = 4.0 * (rng.uniform01() - 0.5);
    }
    const double c = 0.2 + rng.uniform01();
    VectorXd pa = project_l2_ball(a, c);
    CHECK((project_l2_ball(pa, c) - pa).norm() <= 1e-14);
    CHECK((pa - project_l2_ball(b, c)).norm() <= (a - b).norm() + 1e-12);
  }
}

TEST_CASE("soft threshold") {
  VectorXd v(2);
  v << 2.0, -0.5;
  VectorXd st = soft_threshold(v, 1.0);
  CHECK(st[0] == 1.0);
  CHECK(st[1] == 0.0);
  CHECK((soft_threshold(v, 0.0) - v).norm() == 0.0);
  CHECK(soft_threshold(VectorXd::Zero(3).eval(), 0.7).norm() == 0.0);
  CHECK_THROWS(soft_threshold(v, -1.0));
}

TEST_CASE("regularized z-shrink") {
  VectorXd x(2), beta(2);
  x << 1.0, 2.0;
  beta << 0.5, -0.5;
  VectorXd z = shrink_m1bitcsr_z(x, beta, 1.0, 0.0);
  CHECK((z - (x - beta)).norm() == 0.0);  // gamma = 0 limit
  CHECK(shrink_m1bitcsr_z(VectorXd::Zero(2).eval(), VectorXd::Zero(2).eval(), 1.0, 1.0).norm() == 0.0);
  x << 2.0, 0.0;
  beta << 0.0, 1.0;
  z = shrink_m1bitcsr_z(x, beta, 1.0, 1.0);
  CHECK(z[0] == doctest::Approx(1.0));
  CHECK(z[1] == doctest::Approx(-0.5));
  CHECK_THROWS(shrink_m1bitcsr_z(x, beta, 0.0, 1.0));
  CHECK_THROWS(shrink_m1bitcsr_z(x, beta, 1.0, -0.1));
}
