#include "doctest.h"

#include "m1bit/rng.hpp"
#include "m1bit/tv.hpp"
#include "oracles.hpp"

using m1bit::Index;
using m1bit::MatrixXd;
using m1bit::tv_prox;
using m1bit::tv_value;
using m1bit::VectorXd;

namespace {
MatrixXd random_image(Index r, Index c, std::uint64_t seed) {
  m1bit::RandomStream rng(seed, m1bit::StreamTag::generic);
  MatrixXd m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

double tv_objective(const MatrixXd& u, const MatrixXd& img, double w) {
  return w * tv_value(u) + 0.5 * (u - img).squaredNorm();
}
}  // namespace

TEST_CASE("gradient and divergence are negative adjoints") {
  MatrixXd u = random_image(7, 5, 3);
  MatrixXd px = random_image(7, 5, 4), py = random_image(7, 5, 5);
  MatrixXd gx, gy;
  m1bit::image_gradient(u, gx, gy);
  const double lhs = (gx.array() * px.array() + gy.array() * py.array()).sum();
  const double rhs = -(u.array() * m1bit::image_divergence(px, py).array()).sum();
  // px last column / py last row carry no flux.
  MatrixXd pxm = px;
  pxm.col(4).setZero();
  MatrixXd pym = py;
  pym.row(6).setZero();
  const double lhs_masked = (gx.array() * pxm.array() + gy.array() * pym.array()).sum();
  CHECK(lhs == doctest::Approx(lhs_masked));  // boundary gradient is zero
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("tv prox leaves constant images unchanged") {
  MatrixXd img = MatrixXd::Constant(6, 6, 3.25);
  MatrixXd u = tv_prox(img, 0.5, 50);
  CHECK((u - img).norm() == 0.0);
}

TEST_CASE("tv prox with vanishing weight returns the input") {
  MatrixXd img = random_image(5, 5, 9);
  MatrixXd u = tv_prox(img, 1e-12, 100);
  CHECK((u - img).norm() <= 1e-8);
}

TEST_CASE("tv prox with zero inner iterations is the identity") {
  MatrixXd img = random_image(4, 4, 10);
  CHECK((tv_prox(img, 0.3, 0) - img).norm() == 0.0);
  CHECK_THROWS(tv_prox(img, 0.0, 10));
}

TEST_CASE("1-D step: exact prox splits the jump") {
  MatrixXd img(1, 4);
  img << 0.0, 0.0, 1.0, 1.0;
  const double w = 0.25;
  MatrixXd u = tv_prox(img, w, 4000);
  // Hand KKT solve: plateaus move toward each other by w/2.
  CHECK(u(0, 0) == doctest::Approx(0.125).epsilon(1e-3));
  CHECK(u(0, 1) == doctest::Approx(0.125).epsilon(1e-3));
  CHECK(u(0, 2) == doctest::Approx(0.875).epsilon(1e-3));
  CHECK(u(0, 3) == doctest::Approx(0.875).epsilon(1e-3));

  // Independent long-run dual oracle on a fresh random 1-D signal.
  m1bit::RandomStream rng(21, m1bit::StreamTag::generic);
  MatrixXd sig(1, 9);
  for (Index j = 0; j < 9; ++j) sig(0, j) = rng.normal();
  const double lam = 0.4;
  MatrixXd got = tv_prox(sig, lam, 6000);
  VectorXd want = oracles::tv1d_prox_oracle(sig.row(0).transpose(), lam);
  CHECK((got.row(0).transpose() - want).lpNorm<Eigen::Infinity>() <= 1e-3);
}

TEST_CASE("tv prox objective never increases with more inner iterations") {
  MatrixXd img = random_image(12, 10, 33);
  const double w = 0.7;
  double prev = tv_objective(tv_prox(img, w, 1), img, w);
  for (int iters = 2; iters <= 40; ++iters) {
    const double cur = tv_objective(tv_prox(img, w, iters), img, w);
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
}

TEST_CASE("tv prox duality gap shrinks") {
  MatrixXd img = random_image(10, 10, 55);
  double gap_small = 0, gap_large = 0;
  tv_prox(img, 0.5, 5, &gap_small);
  tv_prox(img, 0.5, 500, &gap_large);
  CHECK(gap_large >= 0.0);
  CHECK(gap_large <= gap_small);
  CHECK(gap_large <= 1e-2);
}
