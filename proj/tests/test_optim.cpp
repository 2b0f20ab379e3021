#include "doctest.h"
#include "mixnash/errors.hpp"
#include "mixnash/optim.hpp"
#include "oracles.hpp"

using namespace mixnash;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

TrainState pure_state(const VectorXd& x) {
  TrainState s;
  s.iterate = PureProfile{x};
  s.velocity = VectorXd::Zero(x.size());
  return s;
}

SolverConfig constant_mcgni(int iterations) {
  SolverConfig c;
  c.generator = GeneratorKind::Constant;
  c.iterations = iterations;
  return c;
}

// Noise-free regret along a run: Constant profiles do not depend on the batch.
double regret_at(const Game& g, const SolverConfig& c, const VectorXd& x) {
  TrainState s = initial_state(c, g);
  s.set_params(x);
  Rng rng(0);
  const Profile& p = std::get<Profile>(s.iterate);
  return mcgni_value(p, g, c.mcgni, sample_batch(rng, p, 1)).total;
}

}  // namespace

TEST_CASE("momentum step") {
  const VectorXd x = (VectorXd(3) << 1, 2, 3).finished();
  const VectorXd g = (VectorXd(3) << 0.5, -1, 4).finished();
  CHECK(momentum_step(pure_state(x), g, 0.1, 0.0).params().isApprox(x - 0.1 * g));

  const TrainState still = momentum_step(pure_state(x), VectorXd::Zero(3), 0.1, 0.9);
  CHECK(still.params() == x);
  CHECK(still.velocity.isZero(0.0));

  const TrainState two = momentum_step(momentum_step(pure_state(x), g, 0.01, 0.9), g, 0.01, 0.9);
  CHECK((x - two.params()).isApprox(0.01 * g * 2.9, 1e-14));
  CHECK(two.velocity.isApprox(1.9 * g));

  CHECK_THROWS_AS(momentum_step(pure_state(x), VectorXd::Zero(2), 0.1, 0.9), InvalidArgument);
}

TEST_CASE("config validation") {
  SolverConfig c;
  c.rho = 0.0;
  CHECK_THROWS(c.validate());
  c = {};
  c.kappa = 1.0;
  CHECK_THROWS(c.validate());
  c = {};
  c.iterations = 0;
  CHECK_THROWS(c.validate());
  c = {};
  c.mcgni.lambda = -1.0;
  CHECK_THROWS(c.validate());
  CHECK_NOTHROW(SolverConfig{}.validate());
}

TEST_CASE("single player convex quadratic reaches its minimizer") {
  MatrixXd Q(2, 2);
  Q << 2, 0.5, 0, 1;
  const VectorXd r = (VectorXd(2) << 1, -1).finished();
  const Game g = Game::quadratic({2}, {Q}, {r});
  const VectorXd xs = -(Q + Q.transpose()).lu().solve(r);
  // The regret is about lambda |grad|^2, so a wider radius speeds this up.
  SolverConfig c = constant_mcgni(2000);
  c.mcgni.lambda = 0.1;
  const RunResult res = run(c, g);
  CHECK_FALSE(res.diverged);
  CHECK((res.state.params() - xs).norm() < 1e-3);
}

TEST_CASE("runs started at a stationary point stay there") {
  const Game g = gen_convex_quadratic(4, 2);
  const VectorXd xs = quadratic_stationary_point(g);
  for (Method m : {Method::MCGNI, Method::GradGNI, Method::SGA}) {
    SolverConfig c = constant_mcgni(30);
    c.method = m;
    c.kappa = 0.0;
    TrainState s = initial_state(c, g);
    s.set_params(xs);
    const RunResult res = run_from(c, g, s);
    CHECK((res.state.params() - xs).norm() < 1e-12);
  }
}

TEST_CASE("runs are deterministic") {
  const Game g = gen_quadratic(3, 2);
  for (Method m : {Method::MCGNI, Method::GradGNI, Method::SGA}) {
    SolverConfig c;
    c.method = m;
    c.iterations = 12;
    c.snp_every = 5;
    const RunResult a = run(c, g), b = run(c, g);
    REQUIRE(a.metrics.size() == 13);
    for (std::size_t k = 0; k < a.metrics.size(); ++k) {
      CHECK(a.metrics[k].local_regret == b.metrics[k].local_regret);
      CHECK(a.metrics[k].grad_norm == b.metrics[k].grad_norm);
      CHECK(a.metrics[k].snp_residual == b.metrics[k].snp_residual);
    }
    CHECK(a.metrics[5].snp_residual.has_value());
    CHECK_FALSE(a.metrics[6].snp_residual.has_value());
    CHECK(a.metrics.back().snp_residual.has_value());
    CHECK(a.state.params() == b.state.params());
  }
}

TEST_CASE("divergence is flagged, not thrown") {
  // SGA with a huge step on an indefinite game blows up.
  const Game g = gen_quadratic(0, 3);
  SolverConfig c;
  c.method = Method::SGA;
  c.rho = 10.0;
  c.iterations = 500;
  const RunResult res = run(c, g);
  CHECK(res.diverged);
  CHECK(std::isfinite(res.final_regret));
  CHECK(res.metrics.size() < 501);
}

TEST_CASE("min_grad_decay") {
  std::vector<MetricsRow> rows(4);
  for (int k = 0; k < 4; ++k) rows[k].grad_norm = 4.0 - k;
  CHECK(min_grad_decay(rows) == 1.0);
  for (auto& r : rows) r.grad_norm = 3.0;
  CHECK(min_grad_decay(rows) == 9.0);
  CHECK(running_min_grad_sq(rows) == std::vector<double>(4, 9.0));
  CHECK_THROWS(min_grad_decay({}));
}

TEST_CASE("noise free descent with plain gradient steps") {
  for (int s = 0; s < 20; ++s) {
    const Game g = gen_quadratic(700 + s, 3);
    SolverConfig c = constant_mcgni(300);
    c.kappa = 0.0;
    c.rho = 1e-3;
    c.mcgni.lambda = std::min(1e-3, 1.0 / gradient_lipschitz(g));
    c.init_seed = s;
    const RunResult res = run(c, g);
    bool monotone = true;
    for (std::size_t k = 1; k < res.metrics.size(); ++k)
      monotone = monotone && res.metrics[k].local_regret <= res.metrics[k - 1].local_regret + 1e-12;
    CHECK(monotone);
    CHECK(regret_at(g, c, res.state.params()) == res.metrics.back().local_regret);
  }
}

TEST_CASE("gradient running minimum decays on a convex game") {
  const Game g = gen_convex_quadratic(9, 3);
  SolverConfig c = constant_mcgni(2000);
  c.kappa = 0.0;
  const RunResult res = run(c, g);
  const auto m = running_min_grad_sq(res.metrics);
  CHECK(m[2000] < m[200]);
}

TEST_CASE("net generators lower the regret on convex games") {
  int improved = 0;
  for (int s = 0; s < 20; ++s) {
    const Game g = gen_convex_quadratic(1000 + s, 2);
    SolverConfig c;
    c.mcgni.batch = 32;
    c.mcgni.eval_batch = 256;
    c.init_seed = s;
    c.batch_seed = 100 + s;
    const RunResult res = run(c, g);
    if (!res.diverged && res.metrics.back().local_regret < res.metrics.front().local_regret) ++improved;
  }
  CHECK(improved >= 19);
}
