#include "mixnash/selfcheck.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "mixnash/baselines.hpp"
#include "mixnash/mcgni.hpp"
#include "mixnash/optim.hpp"

namespace mixnash {

namespace {

double rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-300});
  return (a - b).norm() / scale;
}

double rel_err(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

// Central differences over every coordinate.
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& theta, double h = 1e-5) {
  Eigen::VectorXd g(theta.size());
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    const double step = h * (1.0 + std::abs(theta(k)));
    Eigen::VectorXd up = theta, down = theta;
    up(k) += step;
    down(k) -= step;
    g(k) = (f(up) - f(down)) / (2.0 * step);
  }
  return g;
}

Generator small_net(Rng& rng, int d, int n) {
  const int width = 2 + static_cast<int>(rng.below(3));
  Generator g = init_net(d, n, {width, 3}, {Activation::Tanh, Activation::Tanh}, rng.next_u64());
  // Nonzero biases so every parameter gets exercised.
  Eigen::VectorXd p = g.params();
  for (Eigen::Index k = 0; k < p.size(); ++k) p(k) += 0.3 * rng.uniform(-1.0, 1.0);
  return g.with_params(p);
}

Profile small_profile(Rng& rng, const Game& game) {
  Profile p;
  for (int i = 0; i < game.num_players(); ++i) p.generators.push_back(small_net(rng, 2, game.dim(i)));
  return p;
}

Profile constant_profile(const Game& game, const Eigen::VectorXd& x) {
  Profile p;
  for (int i = 0; i < game.num_players(); ++i)
    p.generators.push_back(Generator::constant(x.segment(game.offset(i), game.dim(i))));
  return p;
}

Eigen::VectorXd random_point(Rng& rng, Eigen::Index n, double scale = 1.0) {
  Eigen::VectorXd x(n);
  for (Eigen::Index k = 0; k < n; ++k) x(k) = rng.uniform(-scale, scale);
  return x;
}

CheckResult finish(std::string name, double measured, double threshold, std::string detail = {}) {
  return {std::move(name), measured < threshold, measured, threshold, std::move(detail)};
}

}  // namespace

CheckResult check_vjp(const SelfCheckOptions& o) {
  Rng rng(o.seed);
  double worst = 0.0;
  for (int c = 0; c < o.cases; ++c) {
    const int d = 1 + static_cast<int>(rng.below(3));
    const int n = 1 + static_cast<int>(rng.below(3));
    const Generator gen = small_net(rng, d, n);
    Rng local(rng.next_u64());
    const Eigen::MatrixXd omega = sample_omega(local, 3, d).samples;
    const Eigen::MatrixXd up = Eigen::MatrixXd::NullaryExpr(n, 3, [&] { return rng.uniform(-1, 1); });
    const Eigen::VectorXd got = o.vjp(gen, omega, up);
    const Eigen::VectorXd ref = fd_gradient(
        [&](const Eigen::VectorXd& th) {
          return (up.array() * forward_batch(gen.with_params(th), omega).array()).sum();
        },
        gen.params());
    worst = std::max(worst, rel_err(got, ref));
  }
  return finish("gradcheck.vjp_params", worst, 1e-6);
}

CheckResult check_estimate_grad_F(const SelfCheckOptions& o) {
  Rng rng(o.seed + 1);
  double worst = 0.0;
  for (int c = 0; c < o.cases; ++c) {
    const Game game = gen_quadratic(rng.next_u64(), 1 + static_cast<int>(rng.below(2)));
    const Profile profile = small_profile(rng, game);
    const Batch batch = sample_batch(rng, profile, 4);
    const int i = static_cast<int>(rng.below(2));
    Eigen::VectorXd got(profile.num_params());
    {
      const auto blocks = estimate_grad_F(profile, game, i, batch);
      for (int k = 0; k < profile.num_players(); ++k)
        got.segment(profile.param_offset(k), blocks[k].size()) = blocks[k];
    }
    const Eigen::VectorXd ref = fd_gradient(
        [&](const Eigen::VectorXd& th) { return estimate_F(profile.with_flat(th), game, i, batch); },
        profile.flat());
    worst = std::max(worst, rel_err(got, ref));
  }
  return finish("gradcheck.estimate_grad_F", worst, 1e-5);
}

CheckResult check_mcgni_grad(const SelfCheckOptions& o) {
  Rng rng(o.seed + 2);
  MCGNIConfig config;
  config.lambda = 0.05;
  double worst = 0.0;
  for (int c = 0; c < o.cases; ++c) {
    const Game game = gen_quadratic(rng.next_u64(), 1 + static_cast<int>(rng.below(2)));
    const Profile profile = small_profile(rng, game);
    const Batch batch = sample_batch(rng, profile, 4);
    const Eigen::VectorXd got = mcgni_grad(profile, game, config, batch).flat();
    const Eigen::VectorXd ref = fd_gradient(
        [&](const Eigen::VectorXd& th) {
          return mcgni_value(profile.with_flat(th), game, config, batch).total;
        },
        profile.flat());
    worst = std::max(worst, rel_err(got, ref));
  }
  return finish("gradcheck.mcgni_grad", worst, 1e-4);
}

CheckResult check_gni_grad(const SelfCheckOptions& o) {
  Rng rng(o.seed + 3);
  double worst = 0.0;
  for (int c = 0; c < o.cases; ++c) {
    const Game game = gen_quadratic(rng.next_u64(), 1 + static_cast<int>(rng.below(3)));
    const Eigen::VectorXd x = random_point(rng, game.total_dim());
    const Eigen::VectorXd got = gni_grad(x, game, 0.05, GradMode::Exact);
    const Eigen::VectorXd ref =
        fd_gradient([&](const Eigen::VectorXd& y) { return gni_value(y, game, 0.05); }, x);
    worst = std::max(worst, rel_err(got, ref));
  }
  return finish("gradcheck.gni_grad", worst, 1e-6);
}

CheckResult check_sandwich(const SelfCheckOptions& o) {
  Rng rng(o.seed + 4);
  double lo = INFINITY, hi = -INFINITY;
  bool ok = true;
  for (int c = 0; c < o.cases; ++c) {
    const Game game = gen_quadratic(rng.next_u64(), 1 + static_cast<int>(rng.below(4)));
    const Eigen::VectorXd x = random_point(rng, game.total_dim());
    MCGNIConfig config;
    config.lambda = 1.0 / (2.0 * gradient_lipschitz(game));
    const Profile profile = constant_profile(game, x);
    const Batch batch = sample_batch(rng, profile, 1);
    const LocalRegret v = mcgni_value(profile, game, config, batch);
    for (int i = 0; i < game.num_players(); ++i) {
      const double g2 = estimate_grad_F(profile, game, i, batch)[i].squaredNorm();
      const double lower = config.lambda / 2.0 * g2;
      const double upper = 1.5 * config.lambda * g2;
      ok = ok && v.per_player[i] >= lower - 1e-9 && v.per_player[i] <= upper + 1e-9;
      if (g2 > 0.0) {
        lo = std::min(lo, v.per_player[i] / (config.lambda * g2));
        hi = std::max(hi, v.per_player[i] / (config.lambda * g2));
      }
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "V_i / (lambda |Gamma_i|^2) in [%.6f, %.6f], bounds [0.5, 1.5]",
                lo, hi);
  CheckResult r{"sandwich.local_regret", ok, hi, 1.5, buf};
  return r;
}

CheckResult check_pure_reduction(const SelfCheckOptions& o) {
  Rng rng(o.seed + 5);
  MCGNIConfig config;
  double worst = 0.0;
  for (int c = 0; c < o.cases; ++c) {
    const Game game = c % 2 == 0
                          ? gen_quadratic(rng.next_u64(), 1 + static_cast<int>(rng.below(3)))
                          : gen_gamut(rng.next_u64(), 3, 2, EntryDist::UniformSym);
    const Eigen::VectorXd x = random_point(rng, game.total_dim());
    const Profile profile = constant_profile(game, x);
    const Batch batch = sample_batch(rng, profile, 2);
    worst = std::max(worst, rel_err(mcgni_value(profile, game, config, batch).total,
                                     gni_value(x, game, config.lambda)));
    worst = std::max(worst, rel_err(mcgni_grad(profile, game, config, batch).flat(),
                                     gni_grad(x, game, config.lambda, GradMode::Exact)));
  }
  return finish("reduction.pure_strategy", worst, 1e-8);
}

CheckResult check_scalar_closed_form(const SelfCheckOptions&) {
  // f(x) = x^2, Constant c = 1, lambda = 0.1: V = 4 lambda (1 - lambda) c^2,
  // dV/dc = 8 lambda (1 - lambda) c.
  const Game game = Game::quadratic({1}, {Eigen::MatrixXd::Constant(1, 1, 1.0)},
                                    {Eigen::VectorXd::Zero(1)});
  Profile profile;
  profile.generators.push_back(Generator::constant(Eigen::VectorXd::Constant(1, 1.0)));
  MCGNIConfig config;
  config.lambda = 0.1;
  Rng rng(0);
  const Batch batch = sample_batch(rng, profile, 1);
  const double v = mcgni_value(profile, game, config, batch).total;
  const double g = mcgni_grad(profile, game, config, batch).flat()(0);
  const double err = std::max(std::abs(v - 0.36), std::abs(g - 0.72));
  char buf[96];
  std::snprintf(buf, sizeof buf, "V = %.12f (0.36), dV/dc = %.12f (0.72)", v, g);
  return finish("closed_form.scalar", err, 1e-6, buf);
}

CheckResult check_convex_nash(const SelfCheckOptions& o) {
  const Game game = gen_convex_quadratic(o.seed + 6, 3);
  const Eigen::VectorXd target = quadratic_stationary_point(game);
  SolverConfig config;
  config.generator = GeneratorKind::Constant;
  config.init_seed = o.seed;
  const RunResult result = run(config, game);
  const Eigen::VectorXd x = result.state.params();
  const double dist = (x - target).norm();
  const double snp = result.metrics.back().snp_residual.value_or(INFINITY);
  char buf[96];
  std::snprintf(buf, sizeof buf, "|x - x*| = %.3e, SNP residual = %.3e", dist, snp);
  CheckResult r = finish("closed_form.convex_nash", dist, 1e-3, buf);
  r.passed = r.passed && snp < 1e-6 && !result.diverged;
  return r;
}

std::vector<CheckResult> selfcheck(const SelfCheckOptions& options) {
  return {check_vjp(options),          check_estimate_grad_F(options),
          check_mcgni_grad(options),   check_gni_grad(options),
          check_sandwich(options),     check_pure_reduction(options),
          check_scalar_closed_form(options), check_convex_nash(options)};
}

std::string format_report(const std::vector<CheckResult>& results) {
  std::ostringstream os;
  for (const auto& r : results) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s %-28s measured %.3e threshold %.1e", r.passed ? "PASS" : "FAIL",
                  r.name.c_str(), r.measured, r.threshold);
    os << buf;
    if (!r.detail.empty()) os << "  " << r.detail;
    os << '\n';
  }
  return os.str();
}

}  // namespace mixnash
