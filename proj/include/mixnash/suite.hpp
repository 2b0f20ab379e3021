#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "mixnash/config.hpp"
#include "mixnash/optim.hpp"

namespace mixnash {

struct RunRecord {
  int size = 0;
  int instance = 0;
  Method method = Method::MCGNI;
  double final_regret = 0.0;
  bool diverged = false;
  std::string csv_path;
};

struct SummaryCell {
  GameKind family = GameKind::Quadratic;
  int size = 0;
  Method method = Method::MCGNI;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single instance
  int diverged = 0;
  int n = 0;
};

struct SummaryTable {
  SuiteConfig suite;
  std::vector<SummaryCell> cells;  // sizes outer, methods inner
  std::vector<RunRecord> runs;     // sizes, instances, methods
};

// CSV columns: iteration,local_regret,grad_norm,snp_residual,elapsed_ms with
// 17 significant digits; skipped diagnostics are empty fields.
void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& path);
std::vector<MetricsRow> read_metrics_csv(const std::string& path);

// Instance j of a size: game seed suite_seed + j. Gamut without a fixed
// distribution cycles through the five entry distributions by j.
GameSpec instance_spec(const SuiteConfig& suite, int size, int instance);
// Solver seeds for one run, mixed from the game seed and the method's base seeds.
SolverConfig derive_run_config(const SolverConfig& base, std::uint64_t game_seed);

// Worker count: MIXNASH_WORKERS if set, else suite.workers.
int resolve_workers(const SuiteConfig& suite);

SummaryTable aggregate(const SuiteConfig& suite, std::vector<RunRecord> runs);
SummaryTable run_suite(const SuiteConfig& suite);

nlohmann::json summary_to_json(const SummaryTable& table);
void write_summary_json(const SummaryTable& table, const std::string& path);

}  // namespace mixnash
