#include "mixnash/baselines.hpp"

#include <cmath>

#include "mixnash/errors.hpp"

namespace mixnash {

namespace {

Eigen::VectorXd shifted(const Eigen::VectorXd& x, const Game& game, int i,
                        const Eigen::VectorXd& step) {
  Eigen::VectorXd y = x;
  y.segment(game.offset(i), game.dim(i)) -= step;
  return y;
}

void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be > 0");
}

}  // namespace

Eigen::VectorXd own_gradients(const Eigen::VectorXd& x, const Game& game) {
  Eigen::VectorXd xi(game.total_dim());
  for (int i = 0; i < game.num_players(); ++i)
    xi.segment(game.offset(i), game.dim(i)) =
        cost_grad(game, i, x).segment(game.offset(i), game.dim(i));
  return xi;
}

double gni_value(const Eigen::VectorXd& x, const Game& game, double lambda) {
  check_lambda(lambda);
  double total = 0.0;
  for (int i = 0; i < game.num_players(); ++i) {
    const Eigen::VectorXd g = cost_grad(game, i, x).segment(game.offset(i), game.dim(i));
    const Eigen::VectorXd y = shifted(x, game, i, lambda * g);
    if (!y.allFinite()) throw NumericalError("non-finite shifted point", i);
    total += cost(game, i, x) - cost(game, i, y);
  }
  if (!std::isfinite(total)) throw NumericalError("non-finite GNI value");
  return total;
}

Eigen::VectorXd gni_grad(const Eigen::VectorXd& x, const Game& game, double lambda,
                         GradMode mode) {
  check_lambda(lambda);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(game.total_dim());
  for (int i = 0; i < game.num_players(); ++i) {
    const Eigen::VectorXd g = cost_grad(game, i, x);
    const Eigen::VectorXd y = shifted(x, game, i, lambda * g.segment(game.offset(i), game.dim(i)));
    if (!y.allFinite()) throw NumericalError("non-finite shifted point", i);
    const Eigen::VectorXd w = cost_grad(game, i, y);
    total += g - w;
    if (mode == GradMode::Exact) {
      // J_T^T w = w - lambda H D_i w, with D_i selecting player i's block.
      Eigen::VectorXd own = Eigen::VectorXd::Zero(game.total_dim());
      own.segment(game.offset(i), game.dim(i)) = w.segment(game.offset(i), game.dim(i));
      total += lambda * cost_hvp(game, i, x, own);
    }
  }
  if (!total.allFinite()) throw NumericalError("non-finite GNI gradient");
  return total;
}

Eigen::MatrixXd fd_jacobian_own_gradients(const Eigen::VectorXd& x, const Game& game,
                                          double fd_eps) {
  const Eigen::Index n = x.size();
  const double h = fd_eps * (1.0 + x.norm());
  Eigen::MatrixXd J(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::VectorXd up = x, down = x;
    up(c) += h;
    down(c) -= h;
    J.col(c) = (own_gradients(up, game) - own_gradients(down, game)) / (2.0 * h);
  }
  if (!J.allFinite()) throw NumericalError("non-finite Jacobian entries");
  return J;
}

Eigen::VectorXd sga_direction(const Eigen::VectorXd& x, const Game& game, double lambda_sga,
                              double fd_eps) {
  if (!std::isfinite(lambda_sga)) throw InvalidArgument("lambda_sga must be finite");
  const Eigen::VectorXd xi = own_gradients(x, game);
  if (lambda_sga == 0.0) return xi;
  const Eigen::MatrixXd J = fd_jacobian_own_gradients(x, game, fd_eps);
  const Eigen::MatrixXd A = 0.5 * (J - J.transpose());
  return xi + lambda_sga * A.transpose() * xi;
}

PureProfile baseline_step(const PureProfile& p, const Eigen::VectorXd& direction, double rho) {
  if (direction.size() != p.x.size()) throw InvalidArgument("direction length mismatch");
  return {p.x - rho * direction};
}

}  // namespace mixnash
