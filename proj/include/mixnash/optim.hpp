#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mixnash/baselines.hpp"
#include "mixnash/games.hpp"
#include "mixnash/mcgni.hpp"

namespace mixnash {

enum class Method { MCGNI, GradGNI, SGA };
std::string to_string(Method method);
Method parse_method(const std::string& name);

struct SolverConfig {
  Method method = Method::MCGNI;
  double rho = 1e-2;
  double kappa = 0.9;
  int iterations = 2000;
  // lambda, batch, HVP step, eval batch and eval seed live here.
  MCGNIConfig mcgni;

  GeneratorKind generator = GeneratorKind::Net;
  int latent_dim = 0;  // 0 selects d = n_i per player
  GradMode gni_mode = GradMode::Exact;
  double sga_lambda = 1.0;
  double fd_eps = 1e-5;

  std::uint64_t init_seed = 0;
  std::uint64_t batch_seed = 1;

  int snp_every = 50;
  bool record_timing = false;
  double divergence_threshold = 1e12;

  double lambda() const { return mcgni.lambda; }
  void validate() const;
};

struct MetricsRow {
  int iteration = 0;
  double local_regret = 0.0;
  double grad_norm = 0.0;
  std::optional<double> snp_residual;
  std::optional<double> elapsed_ms;
};

struct TrainState {
  std::variant<Profile, PureProfile> iterate;
  Eigen::VectorXd velocity;
  int iteration = 0;
  std::vector<MetricsRow> history;

  Eigen::VectorXd params() const;
  void set_params(const Eigen::VectorXd& params);
};

// Heavy ball: v <- kappa v + g; params <- params - rho v.
TrainState momentum_step(TrainState state, const Eigen::VectorXd& gradient, double rho,
                         double kappa);

struct RunResult {
  TrainState state;
  std::vector<MetricsRow> metrics;
  bool diverged = false;
  // Last finite local regret; equals the final row's value for converged runs.
  double final_regret = 0.0;
};

// Initial iterate as run() builds it.
TrainState initial_state(const SolverConfig& config, const Game& game);

// Continues from a given state; run() is run_from(initial_state(...)).
RunResult run_from(const SolverConfig& config, const Game& game, TrainState state);
RunResult run(const SolverConfig& config, const Game& game);

// min over rows of grad_norm^2.
double min_grad_decay(const std::vector<MetricsRow>& metrics);
// Running minimum of grad_norm^2, one entry per row.
std::vector<double> running_min_grad_sq(const std::vector<MetricsRow>& metrics);

}  // namespace mixnash
