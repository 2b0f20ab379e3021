#include "mixnash/optim.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "mixnash/errors.hpp"

namespace mixnash {

namespace {

// Training allocates and frees megabyte-sized temporaries every step. With
// glibc's defaults those go through mmap/munmap and trimming, and page faults
// cost about a third of the run time.
void tune_allocator() {
#if defined(__GLIBC__)
  static std::once_flag once;
  std::call_once(once, [] {
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
  });
#endif
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::MCGNI: return "mcgni";
    case Method::GradGNI: return "gradgni";
    case Method::SGA: return "sga";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "mcgni") return Method::MCGNI;
  if (name == "gradgni") return Method::GradGNI;
  if (name == "sga") return Method::SGA;
  throw InvalidArgument("unknown method '" + name + "'");
}

void SolverConfig::validate() const {
  mcgni.validate();
  if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidArgument("rho must be > 0");
  if (!(kappa >= 0.0 && kappa < 1.0)) throw InvalidArgument("kappa must be in [0, 1)");
  if (iterations < 1) throw InvalidArgument("iterations must be >= 1");
  if (latent_dim < 0) throw InvalidArgument("latent_dim must be >= 0");
  if (!std::isfinite(sga_lambda)) throw InvalidArgument("sga_lambda must be finite");
  if (!(fd_eps > 0.0)) throw InvalidArgument("fd_eps must be > 0");
  if (snp_every < 1) throw InvalidArgument("snp_every must be >= 1");
}

Eigen::VectorXd TrainState::params() const {
  if (const auto* p = std::get_if<Profile>(&iterate)) return p->flat();
  return std::get<PureProfile>(iterate).x;
}

void TrainState::set_params(const Eigen::VectorXd& params) {
  if (auto* p = std::get_if<Profile>(&iterate)) {
    *p = p->with_flat(params);
  } else {
    auto& x = std::get<PureProfile>(iterate).x;
    if (params.size() != x.size()) throw InvalidArgument("parameter length mismatch");
    x = params;
  }
}

TrainState momentum_step(TrainState state, const Eigen::VectorXd& gradient, double rho,
                         double kappa) {
  Eigen::VectorXd params = state.params();
  if (gradient.size() != params.size() || state.velocity.size() != params.size())
    throw InvalidArgument("gradient, velocity and parameters must have equal length");
  state.velocity = kappa * state.velocity + gradient;
  params -= rho * state.velocity;
  state.set_params(params);
  ++state.iteration;
  return state;
}

TrainState initial_state(const SolverConfig& config, const Game& game) {
  TrainState state;
  if (config.method == Method::MCGNI) {
    Profile profile;
    for (int i = 0; i < game.num_players(); ++i) {
      const int d = config.latent_dim > 0 ? config.latent_dim : game.dim(i);
      profile.generators.push_back(init_generator(config.generator, d, game.dim(i),
                                                  mix_seed(config.init_seed, i)));
    }
    state.velocity = Eigen::VectorXd::Zero(profile.num_params());
    state.iterate = std::move(profile);
  } else {
    Rng rng(config.init_seed);
    Eigen::VectorXd x(game.total_dim());
    for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = rng.uniform(-0.5, 0.5);
    state.velocity = Eigen::VectorXd::Zero(x.size());
    state.iterate = PureProfile{std::move(x)};
  }
  return state;
}

RunResult run_from(const SolverConfig& config, const Game& game, TrainState state) {
  config.validate();
  tune_allocator();
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const bool mixed = config.method == Method::MCGNI;
  if (mixed != std::holds_alternative<Profile>(state.iterate))
    throw InvalidArgument("state iterate does not match the configured method");
  if (mixed) check_profile(std::get<Profile>(state.iterate), game);

  Batch eval_batch;
  if (mixed) {
    Rng eval_rng(config.mcgni.eval_seed);
    eval_batch = sample_batch(eval_rng, std::get<Profile>(state.iterate), config.mcgni.eval_batch);
  }
  Rng batch_rng(config.batch_seed);

  RunResult result;
  const int first = state.iteration;
  const int last = first + config.iterations;
  for (int k = first; k <= last; ++k) {
    MetricsRow row;
    row.iteration = k;
    Eigen::VectorXd grad;
    bool failed = false;
    try {
      if (mixed) {
        const Profile& profile = std::get<Profile>(state.iterate);
        row.local_regret = mcgni_value(profile, game, config.mcgni, eval_batch).total;
        const Batch batch = sample_batch(batch_rng, profile, config.mcgni.batch);
        grad = mcgni_grad(profile, game, config.mcgni, batch).flat();
        if ((k - first) % config.snp_every == 0 || k == last)
          row.snp_residual = snp_residual(profile, game, eval_batch);
      } else {
        const Eigen::VectorXd& x = std::get<PureProfile>(state.iterate).x;
        row.local_regret = gni_value(x, game, config.lambda());
        grad = config.method == Method::GradGNI
                   ? gni_grad(x, game, config.lambda(), config.gni_mode)
                   : sga_direction(x, game, config.sga_lambda, config.fd_eps);
        if ((k - first) % config.snp_every == 0 || k == last)
          row.snp_residual = own_gradients(x, game).squaredNorm();
      }
      row.grad_norm = grad.norm();
    } catch (const NumericalError&) {
      failed = true;
    } catch (const InvalidArgument&) {
      // Non-finite iterates surface as argument errors from the game.
      if (state.params().allFinite()) throw;
      failed = true;
    }
    if (config.record_timing)
      row.elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();

    const bool regret_ok = !failed && std::isfinite(row.local_regret);
    if (failed || !regret_ok || !std::isfinite(row.grad_norm) ||
        row.grad_norm > config.divergence_threshold) {
      result.diverged = true;
      if (regret_ok) {
        result.metrics.push_back(row);
        result.final_regret = row.local_regret;
      }
      break;
    }
    result.metrics.push_back(row);
    result.final_regret = row.local_regret;
    if (k < last) state = momentum_step(std::move(state), grad, config.rho, config.kappa);
  }
  state.history.insert(state.history.end(), result.metrics.begin(), result.metrics.end());
  result.state = std::move(state);
  return result;
}

RunResult run(const SolverConfig& config, const Game& game) {
  return run_from(config, game, initial_state(config, game));
}

std::vector<double> running_min_grad_sq(const std::vector<MetricsRow>& metrics) {
  std::vector<double> out;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& row : metrics) {
    best = std::min(best, row.grad_norm * row.grad_norm);
    out.push_back(best);
  }
  return out;
}

double min_grad_decay(const std::vector<MetricsRow>& metrics) {
  if (metrics.empty()) throw InvalidArgument("min_grad_decay needs at least one row");
  return running_min_grad_sq(metrics).back();
}

}  // namespace mixnash
