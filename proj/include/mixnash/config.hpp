#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mixnash/games.hpp"
#include "mixnash/optim.hpp"

namespace mixnash {

// Which game to build. size is n_i for quadratic/gamut and m for blotto.
struct GameSpec {
  GameKind family = GameKind::Quadratic;
  std::uint64_t seed = 0;
  int size = 3;
  int players = 4;                 // gamut only
  std::optional<EntryDist> dist;   // quadratic: default uniform01; gamut: cycles per instance

  bool operator==(const GameSpec&) const = default;
};

Game build_game(const GameSpec& spec);

struct SolveConfig {
  GameSpec game;
  SolverConfig solver;
  std::string metrics_path;      // empty: no CSV
  std::string checkpoint_path;   // empty: no generator checkpoint

  bool operator==(const SolveConfig&) const;
};

struct SuiteConfig {
  GameKind family = GameKind::Quadratic;
  std::vector<int> sizes{3};
  int players = 4;
  std::optional<EntryDist> dist;
  int instances = 10;
  std::uint64_t suite_seed = 0;
  // One fully resolved solver configuration per method, in output order.
  std::vector<SolverConfig> methods;
  std::string output_dir = "suite_out";
  int workers = 1;

  bool operator==(const SuiteConfig&) const;
};

// Documents are JSON objects. A document with a "suite" section is a suite
// config, otherwise a solve config. Unknown keys, type mismatches and
// out-of-domain values raise ConfigError naming the offending fields.
SolveConfig parse_solve_config(const std::string& text);
SuiteConfig parse_suite_config(const std::string& text);

// Canonical form: every key present, defaults filled in.
std::string emit_config(const SolveConfig& config);
std::string emit_config(const SuiteConfig& config);

nlohmann::json solver_to_json(const SolverConfig& config);
// Applies the keys of `section` on top of `base`; `where` prefixes error names.
SolverConfig solver_from_json(const nlohmann::json& section, SolverConfig base,
                              const std::string& where);

// Key reference for --help.
std::string config_help();

bool operator==(const MCGNIConfig& a, const MCGNIConfig& b);
bool operator==(const SolverConfig& a, const SolverConfig& b);

}  // namespace mixnash
