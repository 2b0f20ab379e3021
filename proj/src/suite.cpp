#include "mixnash/suite.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "mixnash/errors.hpp"

namespace mixnash {

namespace fs = std::filesystem;

namespace {

constexpr EntryDist kGamutCycle[] = {EntryDist::Uniform01, EntryDist::UniformSym,
                                     EntryDist::Normal, EntryDist::Exponential,
                                     EntryDist::Discrete3};

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string run_csv_path(const SuiteConfig& suite, int size, Method method, int instance) {
  return (fs::path(suite.output_dir) / (to_string(suite.family) + "_" + std::to_string(size)) /
          to_string(method) / ("instance_" + std::to_string(instance) + ".csv"))
      .string();
}

}  // namespace

void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& path) {
  if (rows.empty()) throw InvalidArgument("no metrics rows to write");
  const fs::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "iteration,local_regret,grad_norm,snp_residual,elapsed_ms\n";
  for (const auto& r : rows) {
    out << r.iteration << ',' << fmt17(r.local_regret) << ',' << fmt17(r.grad_norm) << ',';
    if (r.snp_residual) out << fmt17(*r.snp_residual);
    out << ',';
    if (r.elapsed_ms) out << fmt17(*r.elapsed_ms);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line != "iteration,local_regret,grad_norm,snp_residual,elapsed_ms")
    throw IoError("unexpected CSV header in " + path);
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (line.back() == ',') fields.emplace_back();
    if (fields.size() != 5) throw IoError("malformed CSV row in " + path + ": " + line);
    MetricsRow r;
    r.iteration = std::stoi(fields[0]);
    r.local_regret = std::strtod(fields[1].c_str(), nullptr);
    r.grad_norm = std::strtod(fields[2].c_str(), nullptr);
    if (!fields[3].empty()) r.snp_residual = std::strtod(fields[3].c_str(), nullptr);
    if (!fields[4].empty()) r.elapsed_ms = std::strtod(fields[4].c_str(), nullptr);
    rows.push_back(r);
  }
  return rows;
}

GameSpec instance_spec(const SuiteConfig& suite, int size, int instance) {
  GameSpec spec;
  spec.family = suite.family;
  spec.seed = suite.suite_seed + static_cast<std::uint64_t>(instance);
  spec.size = size;
  spec.players = suite.players;
  spec.dist = suite.dist;
  if (suite.family == GameKind::MultiQuadratic && !suite.dist)
    spec.dist = kGamutCycle[instance % 5];
  return spec;
}

SolverConfig derive_run_config(const SolverConfig& base, std::uint64_t game_seed) {
  SolverConfig c = base;
  c.init_seed = mix_seed(game_seed, 0x1000 + base.init_seed);
  c.batch_seed = mix_seed(game_seed, 0x2000 + base.batch_seed);
  c.mcgni.eval_seed = mix_seed(game_seed, 0x3000 + base.mcgni.eval_seed);
  return c;
}

int resolve_workers(const SuiteConfig& suite) {
  if (const char* env = std::getenv("MIXNASH_WORKERS")) {
    const int w = std::atoi(env);
    if (w >= 1) return w;
  }
  return suite.workers;
}

SummaryTable aggregate(const SuiteConfig& suite, std::vector<RunRecord> runs) {
  SummaryTable table;
  table.suite = suite;
  for (int size : suite.sizes) {
    for (const auto& m : suite.methods) {
      SummaryCell cell;
      cell.family = suite.family;
      cell.size = size;
      cell.method = m.method;
      std::vector<double> vals;
      for (const auto& r : runs) {
        if (r.size != size || r.method != m.method) continue;
        vals.push_back(r.final_regret);
        cell.diverged += r.diverged ? 1 : 0;
      }
      cell.n = static_cast<int>(vals.size());
      if (!vals.empty()) {
        double sum = 0.0;
        for (double v : vals) sum += v;
        cell.mean = sum / cell.n;
        if (cell.n > 1) {
          double ss = 0.0;
          for (double v : vals) ss += (v - cell.mean) * (v - cell.mean);
          cell.std = std::sqrt(ss / (cell.n - 1));
        }
      }
      table.cells.push_back(cell);
    }
  }
  table.runs = std::move(runs);
  return table;
}

SummaryTable run_suite(const SuiteConfig& suite) {
  if (suite.methods.empty()) throw InvalidArgument("suite has no methods");
  if (suite.instances < 1) throw InvalidArgument("suite needs at least one instance");
  for (const auto& m : suite.methods) m.validate();

  struct Task {
    int size;
    int instance;
    std::size_t method;
  };
  std::vector<Task> tasks;
  for (int size : suite.sizes)
    for (int j = 0; j < suite.instances; ++j)
      for (std::size_t m = 0; m < suite.methods.size(); ++m) tasks.push_back({size, j, m});

  std::vector<RunRecord> records(tasks.size());
  std::vector<std::string> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      const Task& task = tasks[t];
      try {
        const GameSpec spec = instance_spec(suite, task.size, task.instance);
        const Game game = build_game(spec);
        const SolverConfig& base = suite.methods[task.method];
        const RunResult result = run(derive_run_config(base, spec.seed), game);
        RunRecord& rec = records[t];
        rec.size = task.size;
        rec.instance = task.instance;
        rec.method = base.method;
        rec.diverged = result.diverged;
        rec.final_regret = result.metrics.empty() ? std::nan("") : result.final_regret;
        rec.csv_path = run_csv_path(suite, task.size, base.method, task.instance);
        if (!result.metrics.empty()) write_metrics_csv(result.metrics, rec.csv_path);
      } catch (const std::exception& e) {
        errors[t] = e.what();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(resolve_workers(suite), static_cast<int>(tasks.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (!e.empty()) throw IoError(e);
  return aggregate(suite, std::move(records));
}

nlohmann::json summary_to_json(const SummaryTable& table) {
  using nlohmann::json;
  json cells = json::array();
  for (const auto& c : table.cells)
    cells.push_back({{"family", to_string(c.family)},
                     {"size", c.size},
                     {"method", to_string(c.method)},
                     {"mean", c.mean},
                     {"std", c.std},
                     {"diverged", c.diverged},
                     {"n", c.n}});
  json runs = json::array();
  for (const auto& r : table.runs)
    runs.push_back({{"size", r.size},
                    {"instance", r.instance},
                    {"method", to_string(r.method)},
                    {"final_regret", r.final_regret},
                    {"diverged", r.diverged},
                    {"csv", fs::path(r.csv_path).lexically_relative(table.suite.output_dir).string()}});
  return json{{"suite", json::parse(emit_config(table.suite))}, {"cells", cells}, {"runs", runs}};
}

void write_summary_json(const SummaryTable& table, const std::string& path) {
  if (table.suite.methods.empty()) throw InvalidArgument("summary has no methods");
  const nlohmann::json doc = summary_to_json(table);
  const fs::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace mixnash
