#include "mixnash/config.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "mixnash/errors.hpp"

namespace mixnash {

using nlohmann::json;

namespace {

const std::vector<std::string> kSolverKeys{
    "name",       "lambda",    "rho",         "kappa",      "iterations", "batch",
    "grad_mode",  "hvp_eps",   "eval_batch",  "eval_seed",  "generator",  "latent_dim",
    "gni_mode",   "sga_lambda", "fd_eps",     "init_seed",  "batch_seed", "snp_every",
    "timing",     "divergence_threshold"};

using Schema = std::vector<std::pair<std::string, std::vector<std::string>>>;

void collect_unknown(const json& section, const std::vector<std::string>& allowed,
                     const std::string& where, std::vector<std::string>& unknown) {
  if (!section.is_object()) return;
  for (const auto& [key, value] : section.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      unknown.push_back(where.empty() ? key : where + "." + key);
}

void throw_unknown(const std::vector<std::string>& unknown) {
  if (unknown.empty()) return;
  std::string msg = "unknown config keys:";
  for (const auto& k : unknown) msg += " " + k;
  throw ConfigError(msg);
}

// Checks every known section up front so one error lists all unknown keys.
void reject_unknown_everywhere(const json& doc, const std::vector<std::string>& top,
                               const Schema& sections) {
  std::vector<std::string> unknown;
  collect_unknown(doc, top, "", unknown);
  for (const auto& [name, allowed] : sections)
    if (doc.contains(name)) collect_unknown(doc[name], allowed, name, unknown);
  if (doc.contains("methods") && doc["methods"].is_array())
    for (std::size_t k = 0; k < doc["methods"].size(); ++k)
      collect_unknown(doc["methods"][k], kSolverKeys, "methods[" + std::to_string(k) + "]", unknown);
  throw_unknown(unknown);
}

void reject_unknown(const json& section, const std::vector<std::string>& allowed,
                    const std::string& where) {
  if (!section.is_object()) throw ConfigError(where + ": expected an object");
  std::vector<std::string> unknown;
  collect_unknown(section, allowed, where, unknown);
  throw_unknown(unknown);
}

template <typename T>
T get(const json& section, const std::string& key, const std::string& where) {
  const json& v = section.at(key);
  const std::string name = where.empty() ? key : where + "." + key;
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError(name + ": expected a number");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(name + ": expected a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(name + ": expected a string");
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) throw ConfigError(name + ": expected a non-negative integer");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(name + ": expected an integer");
    }
    return v.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(name + ": " + e.what());
  }
}

template <typename T>
void read(const json& section, const std::string& key, const std::string& where, T& out) {
  if (section.contains(key)) out = get<T>(section, key, where);
}

template <typename Fn>
void check(bool ok, const std::string& name, const Fn& what) {
  if (!ok) throw ConfigError(name + ": " + what());
}

template <typename Parse>
auto parse_enum(const json& section, const std::string& key, const std::string& where,
                Parse parse) {
  const std::string name = where.empty() ? key : where + "." + key;
  const auto text = get<std::string>(section, key, where);
  try {
    return parse(text);
  } catch (const InvalidArgument& e) {
    throw ConfigError(name + ": " + e.what());
  }
}

json parse_document(const std::string& text) {
  try {
    json doc = json::parse(text);
    if (!doc.is_object()) throw ConfigError("config document must be a JSON object");
    return doc;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

json game_spec_to_json(const GameSpec& g) {
  json out{{"family", to_string(g.family)}, {"seed", g.seed}, {"size", g.size},
           {"players", g.players}};
  out["dist"] = g.dist ? json(to_string(*g.dist)) : json(nullptr);
  return out;
}

std::optional<EntryDist> read_dist(const json& section, const std::string& where) {
  if (!section.contains("dist") || section["dist"].is_null()) return std::nullopt;
  return parse_enum(section, "dist", where, parse_entry_dist);
}

void validate_family_size(GameKind family, int size, int players, const std::string& where) {
  check(size >= 1, where + ".size", [] { return "must be >= 1"; });
  if (family == GameKind::MultiQuadratic)
    check(players >= 2, where + ".players", [] { return "must be >= 2"; });
}

}  // namespace

bool operator==(const MCGNIConfig& a, const MCGNIConfig& b) {
  return a.lambda == b.lambda && a.batch == b.batch && a.grad_mode == b.grad_mode &&
         a.hvp_eps == b.hvp_eps && a.eval_batch == b.eval_batch && a.eval_seed == b.eval_seed;
}

bool operator==(const SolverConfig& a, const SolverConfig& b) {
  return a.method == b.method && a.rho == b.rho && a.kappa == b.kappa &&
         a.iterations == b.iterations && a.mcgni == b.mcgni && a.generator == b.generator &&
         a.latent_dim == b.latent_dim && a.gni_mode == b.gni_mode &&
         a.sga_lambda == b.sga_lambda && a.fd_eps == b.fd_eps && a.init_seed == b.init_seed &&
         a.batch_seed == b.batch_seed && a.snp_every == b.snp_every &&
         a.record_timing == b.record_timing && a.divergence_threshold == b.divergence_threshold;
}

bool SolveConfig::operator==(const SolveConfig& o) const {
  return game == o.game && solver == o.solver && metrics_path == o.metrics_path &&
         checkpoint_path == o.checkpoint_path;
}

bool SuiteConfig::operator==(const SuiteConfig& o) const {
  return family == o.family && sizes == o.sizes && players == o.players && dist == o.dist &&
         instances == o.instances && suite_seed == o.suite_seed && methods == o.methods &&
         output_dir == o.output_dir && workers == o.workers;
}

Game build_game(const GameSpec& spec) {
  switch (spec.family) {
    case GameKind::Quadratic:
      return gen_quadratic(spec.seed, spec.size, spec.dist.value_or(EntryDist::Uniform01));
    case GameKind::Blotto: return gen_blotto(spec.seed, spec.size);
    case GameKind::MultiQuadratic:
      return gen_gamut(spec.seed, spec.players, spec.size,
                       spec.dist.value_or(EntryDist::Uniform01));
  }
  throw InvalidArgument("unknown game family");
}

json solver_to_json(const SolverConfig& c) {
  return json{{"name", to_string(c.method)},
              {"lambda", c.mcgni.lambda},
              {"rho", c.rho},
              {"kappa", c.kappa},
              {"iterations", c.iterations},
              {"batch", c.mcgni.batch},
              {"grad_mode", to_string(c.mcgni.grad_mode)},
              {"hvp_eps", c.mcgni.hvp_eps},
              {"eval_batch", c.mcgni.eval_batch},
              {"eval_seed", c.mcgni.eval_seed},
              {"generator", to_string(c.generator)},
              {"latent_dim", c.latent_dim},
              {"gni_mode", to_string(c.gni_mode)},
              {"sga_lambda", c.sga_lambda},
              {"fd_eps", c.fd_eps},
              {"init_seed", c.init_seed},
              {"batch_seed", c.batch_seed},
              {"snp_every", c.snp_every},
              {"timing", c.record_timing},
              {"divergence_threshold", c.divergence_threshold}};
}

SolverConfig solver_from_json(const json& section, SolverConfig c, const std::string& where) {
  reject_unknown(section, kSolverKeys, where);
  auto name = [&](const char* key) { return where + "." + key; };
  if (section.contains("name")) c.method = parse_enum(section, "name", where, parse_method);
  read(section, "lambda", where, c.mcgni.lambda);
  read(section, "rho", where, c.rho);
  read(section, "kappa", where, c.kappa);
  read(section, "iterations", where, c.iterations);
  read(section, "batch", where, c.mcgni.batch);
  if (section.contains("grad_mode"))
    c.mcgni.grad_mode = parse_enum(section, "grad_mode", where, parse_grad_mode);
  read(section, "hvp_eps", where, c.mcgni.hvp_eps);
  read(section, "eval_batch", where, c.mcgni.eval_batch);
  read(section, "eval_seed", where, c.mcgni.eval_seed);
  if (section.contains("generator"))
    c.generator = parse_enum(section, "generator", where, parse_generator_kind);
  read(section, "latent_dim", where, c.latent_dim);
  if (section.contains("gni_mode"))
    c.gni_mode = parse_enum(section, "gni_mode", where, parse_grad_mode);
  read(section, "sga_lambda", where, c.sga_lambda);
  read(section, "fd_eps", where, c.fd_eps);
  read(section, "init_seed", where, c.init_seed);
  read(section, "batch_seed", where, c.batch_seed);
  read(section, "snp_every", where, c.snp_every);
  read(section, "timing", where, c.record_timing);
  read(section, "divergence_threshold", where, c.divergence_threshold);

  check(c.mcgni.lambda > 0.0, name("lambda"), [] { return "must be > 0"; });
  check(c.rho > 0.0, name("rho"), [] { return "must be > 0"; });
  check(c.kappa >= 0.0 && c.kappa < 1.0, name("kappa"), [] { return "must be in [0, 1)"; });
  check(c.iterations >= 1, name("iterations"), [] { return "must be >= 1"; });
  check(c.mcgni.batch >= 1, name("batch"), [] { return "must be >= 1"; });
  check(c.mcgni.hvp_eps > 0.0, name("hvp_eps"), [] { return "must be > 0"; });
  check(c.mcgni.eval_batch >= 1, name("eval_batch"), [] { return "must be >= 1"; });
  check(c.latent_dim >= 0, name("latent_dim"), [] { return "must be >= 0"; });
  check(c.fd_eps > 0.0, name("fd_eps"), [] { return "must be > 0"; });
  check(c.snp_every >= 1, name("snp_every"), [] { return "must be >= 1"; });
  check(c.divergence_threshold > 0.0, name("divergence_threshold"),
        [] { return "must be > 0"; });
  return c;
}

SolveConfig parse_solve_config(const std::string& text) {
  const json doc = parse_document(text);
  reject_unknown_everywhere(doc, {"game", "method", "output"},
                            {{"game", {"family", "seed", "size", "players", "dist"}},
                             {"method", kSolverKeys},
                             {"output", {"metrics", "checkpoint"}}});
  if (!doc.contains("game")) throw ConfigError("missing required section: game");
  SolveConfig out;
  const json& g = doc["game"];
  reject_unknown(g, {"family", "seed", "size", "players", "dist"}, "game");
  if (!g.contains("family")) throw ConfigError("game.family: required");
  out.game.family = parse_enum(g, "family", "game", parse_game_kind);
  read(g, "seed", "game", out.game.seed);
  read(g, "size", "game", out.game.size);
  read(g, "players", "game", out.game.players);
  out.game.dist = read_dist(g, "game");
  validate_family_size(out.game.family, out.game.size, out.game.players, "game");
  out.solver = solver_from_json(doc.value("method", json::object()), SolverConfig{}, "method");
  if (doc.contains("output")) {
    const json& o = doc["output"];
    reject_unknown(o, {"metrics", "checkpoint"}, "output");
    read(o, "metrics", "output", out.metrics_path);
    read(o, "checkpoint", "output", out.checkpoint_path);
  }
  return out;
}

SuiteConfig parse_suite_config(const std::string& text) {
  const json doc = parse_document(text);
  reject_unknown_everywhere(doc, {"game", "suite", "method", "methods"},
                            {{"game", {"family", "sizes", "players", "dist"}},
                             {"suite", {"instances", "suite_seed", "output_dir", "workers"}},
                             {"method", kSolverKeys}});
  if (!doc.contains("game")) throw ConfigError("missing required section: game");
  SuiteConfig out;
  const json& g = doc["game"];
  reject_unknown(g, {"family", "sizes", "players", "dist"}, "game");
  if (!g.contains("family")) throw ConfigError("game.family: required");
  out.family = parse_enum(g, "family", "game", parse_game_kind);
  if (g.contains("sizes")) {
    if (!g["sizes"].is_array() || g["sizes"].empty())
      throw ConfigError("game.sizes: expected a non-empty array of integers");
    out.sizes.clear();
    for (const auto& s : g["sizes"]) {
      if (!s.is_number_integer()) throw ConfigError("game.sizes: expected integers");
      out.sizes.push_back(s.get<int>());
    }
  }
  read(g, "players", "game", out.players);
  out.dist = read_dist(g, "game");
  for (int s : out.sizes) validate_family_size(out.family, s, out.players, "game");

  if (doc.contains("suite")) {
    const json& s = doc["suite"];
    reject_unknown(s, {"instances", "suite_seed", "output_dir", "workers"}, "suite");
    read(s, "instances", "suite", out.instances);
    read(s, "suite_seed", "suite", out.suite_seed);
    read(s, "output_dir", "suite", out.output_dir);
    read(s, "workers", "suite", out.workers);
  }
  check(out.instances >= 1, "suite.instances", [] { return "must be >= 1"; });
  check(out.workers >= 1, "suite.workers", [] { return "must be >= 1"; });

  const SolverConfig shared =
      solver_from_json(doc.value("method", json::object()), SolverConfig{}, "method");
  const json methods = doc.value("methods", json{"mcgni", "gradgni", "sga"});
  if (!methods.is_array()) throw ConfigError("methods: expected an array");
  for (std::size_t k = 0; k < methods.size(); ++k) {
    const std::string where = "methods[" + std::to_string(k) + "]";
    if (methods[k].is_string()) {
      SolverConfig c = shared;
      try {
        c.method = parse_method(methods[k].get<std::string>());
      } catch (const InvalidArgument& e) {
        throw ConfigError(where + ": " + e.what());
      }
      out.methods.push_back(c);
    } else {
      if (!methods[k].contains("name")) throw ConfigError(where + ".name: required");
      out.methods.push_back(solver_from_json(methods[k], shared, where));
    }
  }
  return out;
}

std::string emit_config(const SolveConfig& c) {
  json doc{{"game", game_spec_to_json(c.game)},
           {"method", solver_to_json(c.solver)},
           {"output", {{"metrics", c.metrics_path}, {"checkpoint", c.checkpoint_path}}}};
  return doc.dump(2) + "\n";
}

std::string emit_config(const SuiteConfig& c) {
  json game{{"family", to_string(c.family)}, {"sizes", c.sizes}, {"players", c.players}};
  game["dist"] = c.dist ? json(to_string(*c.dist)) : json(nullptr);
  json methods = json::array();
  for (const auto& m : c.methods) methods.push_back(solver_to_json(m));
  json doc{{"game", game},
           {"suite",
            {{"instances", c.instances},
             {"suite_seed", c.suite_seed},
             {"output_dir", c.output_dir},
             {"workers", c.workers}}},
           {"methods", methods}};
  return doc.dump(2) + "\n";
}

std::string config_help() {
  std::ostringstream os;
  os << R"(Config files are JSON objects.

solve <config>:
  game.family      quadratic | blotto | gamut              (required)
  game.seed        instance seed                            (0)
  game.size        n_i for quadratic/gamut, m for blotto    (3)
  game.players     player count, gamut only                 (4)
  game.dist        uniform01 | uniform_sym | normal | exponential | discrete3
                   (quadratic: uniform01; gamut: uniform01)
  method.*         solver keys below
  output.metrics   per-iteration CSV path                   ("" = none)
  output.checkpoint  generator checkpoint JSON path         ("" = none)

bench <suite-config>:
  game.family, game.players, game.dist as above; game.dist null makes gamut
                   cycle through the five distributions by instance index
  game.sizes       list of sizes                            ([3])
  suite.instances  instances per size                       (10)
  suite.suite_seed instance j uses game seed suite_seed + j (0)
  suite.output_dir directory for CSVs and summary.json      ("suite_out")
  suite.workers    concurrent runs; MIXNASH_WORKERS overrides (1)
  method.*         solver keys shared by all methods
  methods          list of method names or objects {name, solver keys...}
                   (["mcgni", "gradgni", "sga"])

solver keys:
  name             mcgni | gradgni | sga                    (mcgni)
  lambda           local radius                             (0.001)
  rho              step size                                (0.01)
  kappa            heavy-ball momentum                      (0.9)
  iterations       gradient steps                           (2000)
  batch            latent samples per training step         (128)
  grad_mode        exact | first_order (mcgni)              (exact)
  hvp_eps          finite-difference HVP step scale         (0.0001)
  eval_batch       fixed batch for reported local regret    (1024)
  eval_seed        seed of the eval batch                   (0)
  generator        net | constant (mcgni)                   (net)
  latent_dim       latent dimension d, 0 means d = n_i      (0)
  gni_mode         exact | first_order (gradgni)            (exact)
  sga_lambda       SGA adjustment weight                    (1)
  fd_eps           SGA Jacobian step scale                  (1e-05)
  init_seed        initialization seed                      (0)
  batch_seed       training batch stream seed               (1)
  snp_every        stationarity residual cadence            (50)
  timing           record elapsed_ms                        (false)
  divergence_threshold  abort when |gradient| exceeds this  (1e12)
)";
  return os.str();
}

}  // namespace mixnash
