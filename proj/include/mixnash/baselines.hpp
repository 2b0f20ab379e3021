#pragma once

#include <Eigen/Dense>

#include "mixnash/games.hpp"
#include "mixnash/mcgni.hpp"

namespace mixnash {

// Joint pure action in raw (pre-feasibility) coordinates.
struct PureProfile {
  Eigen::VectorXd x;
};

// Stacked own-gradients xi(x) = (grad_1 f_1, ..., grad_N f_N).
Eigen::VectorXd own_gradients(const Eigen::VectorXd& x, const Game& game);

// Pure-strategy local regret: sum_i f_i(x) - f_i(x with x_i <- x_i - lambda grad_i f_i).
double gni_value(const Eigen::VectorXd& x, const Game& game, double lambda);

// Gradient of gni_value. Exact mode applies the Jacobian of the inner shift
// through cost_hvp; FirstOrder treats the shifted gradient as final.
Eigen::VectorXd gni_grad(const Eigen::VectorXd& x, const Game& game, double lambda,
                         GradMode mode = GradMode::Exact);

// Symplectic gradient adjustment: xi + lambda_sga * A^T xi with A the
// antisymmetric part of a central-difference Jacobian of xi.
Eigen::VectorXd sga_direction(const Eigen::VectorXd& x, const Game& game,
                              double lambda_sga = 1.0, double fd_eps = 1e-5);

// Column step fd_eps * (1 + |x|).
Eigen::MatrixXd fd_jacobian_own_gradients(const Eigen::VectorXd& x, const Game& game,
                                          double fd_eps = 1e-5);

PureProfile baseline_step(const PureProfile& p, const Eigen::VectorXd& direction, double rho);

}  // namespace mixnash
