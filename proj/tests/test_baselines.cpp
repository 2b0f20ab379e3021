#include "doctest.h"
#include "mixnash/baselines.hpp"
#include "oracles.hpp"

using namespace mixnash;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

// f_1 = x1 x2 = -f_2.
Game bilinear() {
  MatrixXd Q = MatrixXd::Zero(2, 2);
  Q(0, 1) = 1.0;
  return Game::quadratic({1, 1}, {Q, -Q}, {VectorXd::Zero(2), VectorXd::Zero(2)});
}

Game square_game() {
  return Game::quadratic({1}, {MatrixXd::Constant(1, 1, 1.0)}, {VectorXd::Zero(1)});
}

double lipschitz(const Game& g) {
  double L = 0.0;
  for (const auto& Q : g.quadratic_payload().Q)
    L = std::max(L, Eigen::JacobiSVD<MatrixXd>(Q + Q.transpose()).singularValues()(0));
  return L;
}

}  // namespace

TEST_CASE("gni closed forms") {
  const Game sq = square_game();
  const VectorXd one = VectorXd::Constant(1, 1.0);
  CHECK(gni_value(one, sq, 0.1) == doctest::Approx(0.36).epsilon(1e-14));
  CHECK(gni_grad(one, sq, 0.1)(0) == doctest::Approx(0.72).epsilon(1e-14));
  CHECK(gni_grad(one, sq, 0.1, GradMode::FirstOrder)(0) == doctest::Approx(2.0 - 1.6));

  const Game g = gen_convex_quadratic(1, 2);
  const VectorXd xs = quadratic_stationary_point(g);
  CHECK(std::abs(gni_value(xs, g, 1e-3)) < 1e-12);
  CHECK(gni_grad(xs, g, 1e-3).norm() < 1e-10);
  CHECK(gni_grad(xs, g, 1e-3, GradMode::FirstOrder).norm() < 1e-10);
}

TEST_CASE("gni gradient matches finite differences") {
  oracle::Draw d(3);
  for (int c = 0; c < 100; ++c) {
    const Game g = c % 4 == 3 ? gen_gamut(c, 3, 2, EntryDist::UniformSym) : gen_quadratic(c, d.i(1, 4));
    const VectorXd x = d.vec(g.total_dim());
    const double lambda = d.u(1e-3, 0.1);
    const VectorXd fd = oracle::fd_gradient([&](const VectorXd& y) { return gni_value(y, g, lambda); }, x);
    CHECK(oracle::rel_err(gni_grad(x, g, lambda), fd) < 1e-6);
  }
}

TEST_CASE("gni is non-negative for small radius") {
  oracle::Draw d(4);
  for (int c = 0; c < 100; ++c) {
    const Game g = gen_quadratic(500 + c, d.i(1, 4), static_cast<EntryDist>(c % 5));
    const double lambda = 1.0 / lipschitz(g);
    CHECK(gni_value(d.vec(g.total_dim(), 3.0), g, lambda) >= -1e-12);
  }
}

TEST_CASE("sga direction") {
  const Game b = bilinear();
  CHECK(sga_direction(Vector2d(1, 1), b).isApprox(Vector2d(2, 0), 1e-8));
  CHECK(sga_direction(Vector2d(0, 0), b).isZero(1e-12));

  // Potential game: f_1 = f_2 = x^T S x with S symmetric, Jacobian symmetric.
  MatrixXd S(2, 2);
  S << 2, 0.5, 0.5, 1;
  const Game pot = Game::quadratic({1, 1}, {S, S}, {VectorXd::Zero(2), VectorXd::Zero(2)});
  const Vector2d x(0.3, -0.8);
  CHECK(oracle::rel_err(sga_direction(x, pot), own_gradients(x, pot)) < 1e-9);
}

TEST_CASE("fd jacobian matches analytic blocks") {
  oracle::Draw d(5);
  for (int c = 0; c < 20; ++c) {
    const Game g = gen_quadratic(c, d.i(1, 4));
    MatrixXd J(g.total_dim(), g.total_dim());
    for (int i = 0; i < 2; ++i) {
      const auto& Q = g.quadratic_payload().Q[i];
      J.middleRows(g.offset(i), g.dim(i)) = (Q + Q.transpose()).middleRows(g.offset(i), g.dim(i));
    }
    const MatrixXd fd = fd_jacobian_own_gradients(d.vec(g.total_dim()), g);
    CHECK((fd - J).norm() <= 1e-6 * J.norm());
  }
}

TEST_CASE("baseline step") {
  const PureProfile p{Eigen::Vector3d(1, -2, 0.5)};
  const Eigen::Vector3d dir(0.375, 0.125, -7);
  CHECK(baseline_step(p, dir, 0.0).x == p.x);
  CHECK(baseline_step(p, p.x / 0.25, 0.25).x.isZero(0.0));
  CHECK(baseline_step(baseline_step(p, dir, 0.5), -dir, 0.5).x == p.x);
}

TEST_CASE("sga separates from simultaneous gradient on the bilinear game") {
  const Game b = bilinear();
  PureProfile sga{Vector2d(1, 1)}, plain{Vector2d(1, 1)};
  double xi_prev = own_gradients(sga.x, b).norm(), x_prev = plain.x.norm();
  bool sga_decreasing = true, plain_nondecreasing = true;
  for (int k = 0; k < 1000; ++k) {
    sga = baseline_step(sga, sga_direction(sga.x, b, 1.0), 0.01);
    plain = baseline_step(plain, sga_direction(plain.x, b, 0.0), 0.01);
    const double xi = own_gradients(sga.x, b).norm(), xn = plain.x.norm();
    sga_decreasing = sga_decreasing && xi < xi_prev;
    plain_nondecreasing = plain_nondecreasing && xn >= x_prev;
    xi_prev = xi;
    x_prev = xn;
  }
  CHECK(sga_decreasing);
  CHECK(plain_nondecreasing);
}
