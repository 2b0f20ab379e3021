// mixnash: solve one game, run a benchmark suite, or run the self checks.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mixnash/config.hpp"
#include "mixnash/errors.hpp"
#include "mixnash/selfcheck.hpp"
#include "mixnash/suite.hpp"

using namespace mixnash;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_checkpoint(const SolveConfig& config, const Game& game, const RunResult& result) {
  nlohmann::json doc;
  doc["game"] = game_to_json(game);
  doc["method"] = solver_to_json(config.solver);
  doc["iteration"] = result.state.iteration;
  doc["diverged"] = result.diverged;
  if (const auto* profile = std::get_if<Profile>(&result.state.iterate)) {
    doc["generators"] = nlohmann::json::array();
    for (const auto& g : profile->generators) doc["generators"].push_back(generator_to_json(g));
  } else {
    const auto& x = std::get<PureProfile>(result.state.iterate).x;
    doc["x"] = std::vector<double>(x.data(), x.data() + x.size());
  }
  std::ofstream out(config.checkpoint_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + config.checkpoint_path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + config.checkpoint_path);
}

int cmd_solve(const std::string& path) {
  const SolveConfig config = parse_solve_config(read_file(path));
  const Game game = build_game(config.game);
  const RunResult result = run(config.solver, game);
  if (!config.metrics_path.empty()) write_metrics_csv(result.metrics, config.metrics_path);
  if (!config.checkpoint_path.empty()) write_checkpoint(config, game, result);
  const MetricsRow& last = result.metrics.back();
  std::printf("method %s  iterations %d  final local regret %.6e  grad norm %.3e%s\n",
              to_string(config.solver.method).c_str(), last.iteration, result.final_regret,
              last.grad_norm, result.diverged ? "  DIVERGED" : "");
  return kOk;
}

int cmd_bench(const std::string& path, int instances) {
  SuiteConfig suite = parse_suite_config(read_file(path));
  if (instances > 0) suite.instances = instances;
  const SummaryTable table = run_suite(suite);
  const std::string summary = suite.output_dir + "/summary.json";
  write_summary_json(table, summary);
  std::printf("%-10s %6s %-8s %14s %14s %9s\n", "family", "size", "method", "mean", "std",
              "diverged");
  for (const auto& c : table.cells)
    std::printf("%-10s %6d %-8s %14.6e %14.6e %5d/%-3d\n", to_string(c.family).c_str(), c.size,
                to_string(c.method).c_str(), c.mean, c.std, c.diverged, c.n);
  std::printf("summary: %s\n", summary.c_str());
  return kOk;
}

int cmd_check(int cases) {
  SelfCheckOptions options;
  options.cases = cases;
  const auto results = selfcheck(options);
  std::fputs(format_report(results).c_str(), stdout);
  for (const auto& r : results)
    if (!r.passed) return kCheckFailed;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-strategy Nash equilibria of continuous games via pushforward generators"};
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 ok, 1 self-check failure, 2 usage or I/O error.\n"
      "Environment: MIXNASH_WORKERS overrides suite.workers for bench.\n\n" +
      config_help());

  std::string solve_path, bench_path;
  int instances = 0;
  int cases = 100;
  auto* solve = app.add_subcommand("solve", "Run one solver on one game");
  solve->add_option("config", solve_path, "Solve config (JSON)")->required();
  auto* bench = app.add_subcommand("bench", "Run a seeded benchmark suite and write summary.json");
  bench->add_option("suite-config", bench_path, "Suite config (JSON)")->required();
  bench->add_option("--instances", instances, "Override suite.instances (e.g. 100)")
      ->check(CLI::PositiveNumber);
  auto* check = app.add_subcommand("check", "Gradient, sandwich, reduction and closed-form checks");
  check->add_option("--cases", cases, "Random cases per property")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*solve) return cmd_solve(solve_path);
    if (*bench) return cmd_bench(bench_path, instances);
    return cmd_check(cases);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kUsage;
}
