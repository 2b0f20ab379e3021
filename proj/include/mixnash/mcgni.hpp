#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "mixnash/games.hpp"
#include "mixnash/pushforward.hpp"

namespace mixnash {

// Joint mixed strategy: one generator per player.
struct Profile {
  std::vector<Generator> generators;

  int num_players() const { return static_cast<int>(generators.size()); }
  bool all_constant() const;
  Eigen::Index num_params() const;
  Eigen::Index param_offset(int i) const;
  // Player blocks concatenated in player order.
  Eigen::VectorXd flat() const;
  Profile with_flat(const Eigen::VectorXd& flat) const;
};

// Generator output dimensions must match the game's (raw) player dimensions.
void check_profile(const Profile& profile, const Game& game);

// One latent batch per player, all of equal size.
using Batch = std::vector<OmegaBatch>;
Batch sample_batch(Rng& rng, const Profile& profile, int batch_size);

enum class GradMode { Exact, FirstOrder };
std::string to_string(GradMode mode);
GradMode parse_grad_mode(const std::string& name);

struct MCGNIConfig {
  double lambda = 1e-3;
  int batch = 128;
  GradMode grad_mode = GradMode::Exact;
  double hvp_eps = 1e-4;
  int eval_batch = 1024;
  std::uint64_t eval_seed = 0;

  void validate() const;
};

struct LocalRegret {
  double total = 0.0;
  std::vector<double> per_player;
};

struct GradEstimate {
  std::vector<Eigen::VectorXd> blocks;
  double value = 0.0;
  std::vector<double> player_values;

  Eigen::VectorXd flat() const;
};

// Sample mean of f_i over the joint batch. When every generator is Constant
// the estimate is taken on the first sample only, so results do not depend on
// the batch at all.
double estimate_F(const Profile& profile, const Game& game, int i, const Batch& batch);

// Gradient of estimate_F with respect to every player's parameters, one block
// per player. Block i is the sampled steepest direction pushed to parameter
// space.
std::vector<Eigen::VectorXd> estimate_grad_F(const Profile& profile, const Game& game, int i,
                                             const Batch& batch);

// V_i = F_i(profile) - F_i(profile with theta_i shifted by -lambda * Gamma_i),
// all terms on the same batch.
LocalRegret mcgni_value(const Profile& profile, const Game& game, const MCGNIConfig& config,
                        const Batch& batch);

// Gradient of mcgni_value with respect to all parameters, on one frozen batch.
// Exact mode includes the lambda * Hessian-vector correction from the inner
// shift; FirstOrder drops it.
GradEstimate mcgni_grad(const Profile& profile, const Game& game, const MCGNIConfig& config,
                        const Batch& batch);

using GradientMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// [g(theta + eps v) - g(theta - eps v)] / (2 eps), eps = eps0 (1 + |theta|) / |v|.
Eigen::VectorXd fd_hvp(const GradientMap& gradfn, const Eigen::VectorXd& theta,
                       const Eigen::VectorXd& v, double eps0);

// Stationarity residual sum_i mean_b |E_{-i}[grad_i f_i]|^2, where the inner
// expectation for sample b pairs it with up to 64 other samples of the
// opponents (leave-one-out).
double snp_residual(const Profile& profile, const Game& game, const Batch& eval_batch);

}  // namespace mixnash
