#include <algorithm>
#include <cmath>

#include "mixnash/errors.hpp"
#include "mixnash/mcgni.hpp"

namespace mixnash {

namespace {

constexpr int kInnerSamples = 64;

// Forward traces of every player's generator on a frozen batch, plus the
// stacked joint actions (n x B).
struct Evaluation {
  std::vector<ForwardTrace> traces;
  Eigen::MatrixXd joint;
};

int effective_batch(const Profile& profile, const Batch& batch) {
  if (batch.size() != profile.generators.size())
    throw InvalidArgument("need one latent batch per player");
  const int size = batch.front().size();
  for (const auto& b : batch)
    if (b.size() != size || size < 1)
      throw InvalidArgument("latent batches must be non-empty and of equal size");
  return profile.all_constant() ? 1 : size;
}

Eigen::MatrixXd latent(const Batch& batch, int i, int cols) {
  return batch[i].samples.leftCols(cols);
}

Evaluation evaluate(const Profile& profile, const Game& game, const Batch& batch) {
  check_profile(profile, game);
  const int B = effective_batch(profile, batch);
  Evaluation e;
  e.joint.resize(game.total_dim(), B);
  for (int k = 0; k < profile.num_players(); ++k) {
    e.traces.push_back(forward_trace(profile.generators[k], latent(batch, k, B)));
    e.joint.middleRows(game.offset(k), game.dim(k)) = e.traces.back().output();
  }
  return e;
}

Evaluation replace_player(const Evaluation& base, const Generator& gen, int i, const Game& game,
                          const Batch& batch) {
  Evaluation e = base;
  const auto B = static_cast<int>(base.joint.cols());
  e.traces[i] = forward_trace(gen, latent(batch, i, B));
  e.joint.middleRows(game.offset(i), game.dim(i)) = e.traces[i].output();
  return e;
}

double mean_cost(const Evaluation& e, const Game& game, int i) {
  return cost_batch(game, i, e.joint).mean();
}

// Gradient blocks of the batch-mean of f_i. With only >= 0, just that block
// is computed and the others are left empty.
std::vector<Eigen::VectorXd> grad_blocks(const Evaluation& e, const Profile& profile,
                                         const Game& game, int i, int only = -1) {
  const Eigen::MatrixXd G = cost_grad_batch(game, i, e.joint) / static_cast<double>(e.joint.cols());
  std::vector<Eigen::VectorXd> blocks(profile.num_players());
  for (int k = 0; k < profile.num_players(); ++k) {
    if (only >= 0 && k != only) continue;
    blocks[k] = backward(profile.generators[k], e.traces[k],
                         G.middleRows(game.offset(k), game.dim(k)));
  }
  return blocks;
}

Eigen::VectorXd concat(const std::vector<Eigen::VectorXd>& blocks) {
  Eigen::Index total = 0;
  for (const auto& b : blocks) total += b.size();
  Eigen::VectorXd out(total);
  Eigen::Index offset = 0;
  for (const auto& b : blocks) {
    out.segment(offset, b.size()) = b;
    offset += b.size();
  }
  return out;
}

void check_player(const Profile& profile, int i) {
  if (i < 0 || i >= profile.num_players())
    throw InvalidArgument("player index " + std::to_string(i) + " out of range");
}

}  // namespace

bool Profile::all_constant() const {
  return std::all_of(generators.begin(), generators.end(),
                     [](const Generator& g) { return g.is_constant(); });
}

Eigen::Index Profile::num_params() const {
  Eigen::Index total = 0;
  for (const auto& g : generators) total += g.num_params();
  return total;
}

Eigen::Index Profile::param_offset(int i) const {
  Eigen::Index offset = 0;
  for (int k = 0; k < i; ++k) offset += generators[k].num_params();
  return offset;
}

Eigen::VectorXd Profile::flat() const {
  std::vector<Eigen::VectorXd> blocks;
  for (const auto& g : generators) blocks.push_back(g.params());
  return concat(blocks);
}

Profile Profile::with_flat(const Eigen::VectorXd& flat) const {
  if (flat.size() != num_params()) throw InvalidArgument("flat parameter length mismatch");
  Profile out;
  Eigen::Index offset = 0;
  for (const auto& g : generators) {
    out.generators.push_back(g.with_params(flat.segment(offset, g.num_params())));
    offset += g.num_params();
  }
  return out;
}

void check_profile(const Profile& profile, const Game& game) {
  if (profile.num_players() != game.num_players())
    throw InvalidArgument("profile has " + std::to_string(profile.num_players()) +
                          " generators, game has " + std::to_string(game.num_players()) +
                          " players");
  for (int k = 0; k < game.num_players(); ++k)
    if (profile.generators[k].output_dim() != game.dim(k))
      throw InvalidArgument("generator " + std::to_string(k) + " outputs dimension " +
                            std::to_string(profile.generators[k].output_dim()) +
                            ", game expects " + std::to_string(game.dim(k)));
}

Batch sample_batch(Rng& rng, const Profile& profile, int batch_size) {
  Batch out;
  for (const auto& g : profile.generators)
    out.push_back(sample_omega(rng, batch_size, std::max(1, g.latent_dim())));
  return out;
}

std::string to_string(GradMode mode) { return mode == GradMode::Exact ? "exact" : "first_order"; }

GradMode parse_grad_mode(const std::string& name) {
  if (name == "exact") return GradMode::Exact;
  if (name == "first_order") return GradMode::FirstOrder;
  throw InvalidArgument("unknown gradient mode '" + name + "'");
}

void MCGNIConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be > 0");
  if (batch < 1) throw InvalidArgument("batch must be >= 1");
  if (!(hvp_eps > 0.0)) throw InvalidArgument("hvp_eps must be > 0");
  if (eval_batch < 1) throw InvalidArgument("eval_batch must be >= 1");
}

Eigen::VectorXd GradEstimate::flat() const { return concat(blocks); }

double estimate_F(const Profile& profile, const Game& game, int i, const Batch& batch) {
  check_player(profile, i);
  return mean_cost(evaluate(profile, game, batch), game, i);
}

std::vector<Eigen::VectorXd> estimate_grad_F(const Profile& profile, const Game& game, int i,
                                             const Batch& batch) {
  check_player(profile, i);
  return grad_blocks(evaluate(profile, game, batch), profile, game, i);
}

LocalRegret mcgni_value(const Profile& profile, const Game& game, const MCGNIConfig& config,
                        const Batch& batch) {
  config.validate();
  const Evaluation base = evaluate(profile, game, batch);
  LocalRegret out;
  for (int i = 0; i < profile.num_players(); ++i) {
    const Eigen::VectorXd gamma = grad_blocks(base, profile, game, i, i)[i];
    const Generator shifted = axpy_params(profile.generators[i], gamma, -config.lambda);
    const Evaluation moved = replace_player(base, shifted, i, game, batch);
    const double v = mean_cost(base, game, i) - mean_cost(moved, game, i);
    if (!std::isfinite(v)) throw NumericalError("non-finite local regret", i);
    out.per_player.push_back(v);
    out.total += v;
  }
  return out;
}

Eigen::VectorXd fd_hvp(const GradientMap& gradfn, const Eigen::VectorXd& theta,
                       const Eigen::VectorXd& v, double eps0) {
  if (theta.size() != v.size()) throw InvalidArgument("fd_hvp: theta and v lengths differ");
  const double vnorm = v.norm();
  if (vnorm == 0.0) return Eigen::VectorXd::Zero(theta.size());
  const double eps = eps0 * (1.0 + theta.norm()) / vnorm;
  Eigen::VectorXd out = (gradfn(theta + eps * v) - gradfn(theta - eps * v)) / (2.0 * eps);
  if (!out.allFinite()) throw NumericalError("fd_hvp: non-finite difference quotient");
  return out;
}

GradEstimate mcgni_grad(const Profile& profile, const Game& game, const MCGNIConfig& config,
                        const Batch& batch) {
  config.validate();
  const Evaluation base = evaluate(profile, game, batch);
  const int N = profile.num_players();
  const Eigen::VectorXd theta = profile.flat();

  GradEstimate out;
  out.blocks.reserve(N);
  for (const auto& g : profile.generators) out.blocks.push_back(Eigen::VectorXd::Zero(g.num_params()));

  for (int i = 0; i < N; ++i) {
    const std::vector<Eigen::VectorXd> at_base = grad_blocks(base, profile, game, i);
    const Generator shifted = axpy_params(profile.generators[i], at_base[i], -config.lambda);
    const Evaluation moved = replace_player(base, shifted, i, game, batch);
    Profile moved_profile = profile;
    moved_profile.generators[i] = shifted;
    const std::vector<Eigen::VectorXd> at_shift = grad_blocks(moved, moved_profile, game, i);

    const double v = mean_cost(base, game, i) - mean_cost(moved, game, i);
    out.player_values.push_back(v);
    out.value += v;

    for (int k = 0; k < N; ++k) out.blocks[k] += at_base[k] - at_shift[k];

    if (config.grad_mode == GradMode::Exact) {
      Eigen::VectorXd dir = Eigen::VectorXd::Zero(theta.size());
      dir.segment(profile.param_offset(i), at_shift[i].size()) = at_shift[i];
      // Only player i's block moves along dir, so the other traces are reused.
      const GradientMap gradfn = [&](const Eigen::VectorXd& th) {
        Profile p = profile;
        p.generators[i] = profile.generators[i].with_params(
            th.segment(profile.param_offset(i), profile.generators[i].num_params()));
        return concat(grad_blocks(replace_player(base, p.generators[i], i, game, batch), p,
                                  game, i));
      };
      Eigen::VectorXd hvp;
      try {
        hvp = fd_hvp(gradfn, theta, dir, config.hvp_eps);
      } catch (const NumericalError&) {
        throw NumericalError("non-finite Hessian-vector quotient for player " +
                                 std::to_string(i),
                             i);
      }
      for (int k = 0; k < N; ++k)
        out.blocks[k] += config.lambda *
                         hvp.segment(profile.param_offset(k), profile.generators[k].num_params());
    }
  }
  for (int k = 0; k < N; ++k)
    if (!out.blocks[k].allFinite()) throw NumericalError("non-finite local regret gradient", k);
  return out;
}

double snp_residual(const Profile& profile, const Game& game, const Batch& eval_batch) {
  check_profile(profile, game);
  if (!profile.all_constant() && eval_batch.front().size() < 2)
    throw InvalidArgument("residual needs at least two samples with Net generators");
  const Evaluation e = evaluate(profile, game, eval_batch);
  const auto B = static_cast<int>(e.joint.cols());
  double total = 0.0;
  for (int i = 0; i < game.num_players(); ++i) {
    const int off = game.offset(i);
    const int dim = game.dim(i);
    if (B == 1) {
      total += cost_grad_batch(game, i, e.joint).middleRows(off, dim).squaredNorm();
      continue;
    }
    const int inner = std::min(kInnerSamples, B - 1);
    double acc = 0.0;
    Eigen::MatrixXd pairs(game.total_dim(), inner);
    for (int b = 0; b < B; ++b) {
      int col = 0;
      for (int other = 0; col < inner; ++other) {
        if (other == b) continue;
        pairs.col(col++) = e.joint.col(other);
      }
      pairs.middleRows(off, dim).colwise() = e.joint.col(b).segment(off, dim);
      acc += cost_grad_batch(game, i, pairs).middleRows(off, dim).rowwise().mean().squaredNorm();
    }
    total += acc / B;
  }
  return total;
}

}  // namespace mixnash
