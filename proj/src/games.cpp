#include "mixnash/games.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mixnash/errors.hpp"
#include "mixnash/rng.hpp"

namespace mixnash {

namespace {

constexpr double kFloor = 1e-12;

double draw(Rng& rng, EntryDist dist) {
  switch (dist) {
    case EntryDist::Uniform01: return rng.uniform();
    case EntryDist::UniformSym: return rng.uniform(-1.0, 1.0);
    case EntryDist::Normal: return rng.normal();
    case EntryDist::Exponential: return rng.exponential();
    case EntryDist::Discrete3: return static_cast<double>(rng.below(3)) - 1.0;
  }
  return 0.0;
}

Eigen::MatrixXd draw_matrix(Rng& rng, int n, EntryDist dist) {
  Eigen::MatrixXd Q(n, n);
  for (int row = 0; row < n; ++row)
    for (int col = 0; col < n; ++col) Q(row, col) = draw(rng, dist);
  return Q;
}

Eigen::VectorXd draw_vector(Rng& rng, int n, EntryDist dist) {
  Eigen::VectorXd r(n);
  for (int k = 0; k < n; ++k) r(k) = draw(rng, dist);
  return r;
}

// Normalized exponential weights over all coordinates.
Eigen::VectorXd normexp(const Eigen::Ref<const Eigen::VectorXd>& z) {
  const double top = z.maxCoeff();
  Eigen::VectorXd w = (z.array() - top).exp();
  return w / w.sum();
}

Eigen::VectorXd floored(const Eigen::VectorXd& w) {
  return ((kFloor / static_cast<double>(w.size())) + (1.0 - kFloor) * w.array()).matrix();
}

struct BlottoEval {
  Eigen::VectorXd w[2];      // normexp weights, length m + 1
  Eigen::VectorXd alloc[2];  // allocations, length m
};

BlottoEval blotto_eval(const BlottoPayload& b, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const int raw = b.battlefields + 1;
  BlottoEval e;
  for (int p = 0; p < 2; ++p) {
    e.w[p] = normexp(x.segment(p * raw, raw));
    e.alloc[p] = b.budgets[p] * floored(e.w[p]).head(b.battlefields);
  }
  return e;
}

double blotto_cost(const BlottoPayload& b, int i, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const BlottoEval e = blotto_eval(b, x);
  return -(e.alloc[i] - e.alloc[1 - i]).array().tanh().sum();
}

Eigen::VectorXd blotto_grad(const BlottoPayload& b, int i,
                            const Eigen::Ref<const Eigen::VectorXd>& x) {
  const int m = b.battlefields;
  const int raw = m + 1;
  const BlottoEval e = blotto_eval(b, x);
  const Eigen::ArrayXd t = (e.alloc[i] - e.alloc[1 - i]).array().tanh();
  const Eigen::ArrayXd sech2 = 1.0 - t.square();
  Eigen::VectorXd g(2 * raw);
  for (int p = 0; p < 2; ++p) {
    // d cost / d alloc_p; slack coordinate receives nothing.
    Eigen::VectorXd up = Eigen::VectorXd::Zero(raw);
    up.head(m) = (p == i ? -sech2 : sech2).matrix();
    const Eigen::VectorXd& w = e.w[p];
    const double scale = b.budgets[p] * (1.0 - kFloor);
    // (diag(w) - w w^T) up
    g.segment(p * raw, raw) = scale * (w.cwiseProduct(up) - w * w.dot(up));
  }
  return g;
}

}  // namespace

std::string to_string(GameKind kind) {
  switch (kind) {
    case GameKind::Quadratic: return "quadratic";
    case GameKind::Blotto: return "blotto";
    case GameKind::MultiQuadratic: return "gamut";
  }
  return "?";
}

std::string to_string(EntryDist dist) {
  switch (dist) {
    case EntryDist::Uniform01: return "uniform01";
    case EntryDist::UniformSym: return "uniform_sym";
    case EntryDist::Normal: return "normal";
    case EntryDist::Exponential: return "exponential";
    case EntryDist::Discrete3: return "discrete3";
  }
  return "?";
}

GameKind parse_game_kind(const std::string& name) {
  if (name == "quadratic") return GameKind::Quadratic;
  if (name == "blotto") return GameKind::Blotto;
  if (name == "gamut") return GameKind::MultiQuadratic;
  throw InvalidArgument("unknown game kind '" + name + "'");
}

EntryDist parse_entry_dist(const std::string& name) {
  for (EntryDist d : {EntryDist::Uniform01, EntryDist::UniformSym, EntryDist::Normal,
                      EntryDist::Exponential, EntryDist::Discrete3})
    if (to_string(d) == name) return d;
  throw InvalidArgument("unknown entry distribution '" + name + "'");
}

void Game::set_dims(std::vector<int> dims) {
  if (dims.empty()) throw InvalidArgument("game needs at least one player");
  for (int d : dims)
    if (d < 1) throw InvalidArgument("player action dimension must be >= 1");
  dims_ = std::move(dims);
  offsets_.assign(dims_.size(), 0);
  std::exclusive_scan(dims_.begin(), dims_.end(), offsets_.begin(), 0);
  total_ = std::accumulate(dims_.begin(), dims_.end(), 0);
}

Game Game::quadratic(std::vector<int> dims, std::vector<Eigen::MatrixXd> Q,
                     std::vector<Eigen::VectorXd> r, GameKind kind) {
  if (kind == GameKind::Blotto) throw InvalidArgument("quadratic payload cannot be Blotto");
  Game g;
  g.kind_ = kind;
  g.set_dims(std::move(dims));
  const auto N = static_cast<std::size_t>(g.num_players());
  if (Q.size() != N || r.size() != N)
    throw InvalidArgument("need one Q_i and one r_i per player");
  for (std::size_t i = 0; i < N; ++i) {
    if (Q[i].rows() != g.total_ || Q[i].cols() != g.total_ || r[i].size() != g.total_)
      throw InvalidArgument("Q_i must be n x n and r_i length n");
    if (!Q[i].allFinite() || !r[i].allFinite())
      throw InvalidArgument("quadratic game entries must be finite");
  }
  g.payload_ = QuadraticPayload{std::move(Q), std::move(r)};
  return g;
}

Game Game::blotto(int battlefields, double budget1, double budget2) {
  if (battlefields < 1) throw InvalidArgument("Blotto needs at least one battlefield");
  if (!(budget1 > 0.0) || !(budget2 > 0.0) || !std::isfinite(budget1) ||
      !std::isfinite(budget2))
    throw InvalidArgument("Blotto budgets must be positive and finite");
  Game g;
  g.kind_ = GameKind::Blotto;
  g.set_dims({battlefields + 1, battlefields + 1});
  BlottoPayload b;
  b.battlefields = battlefields;
  b.budgets[0] = std::min(budget1, budget2);
  b.budgets[1] = std::max(budget1, budget2);
  g.payload_ = b;
  return g;
}

const QuadraticPayload& Game::quadratic_payload() const {
  if (const auto* q = std::get_if<QuadraticPayload>(&payload_)) return *q;
  throw InvalidArgument("game is not quadratic");
}

const BlottoPayload& Game::blotto_payload() const {
  if (const auto* b = std::get_if<BlottoPayload>(&payload_)) return *b;
  throw InvalidArgument("game is not Blotto");
}

void check_point(const Game& game, int i, const Eigen::VectorXd& x) {
  if (i < 0 || i >= game.num_players())
    throw InvalidArgument("player index " + std::to_string(i) + " out of range");
  if (x.size() != game.total_dim())
    throw InvalidArgument("joint action has length " + std::to_string(x.size()) +
                          ", expected " + std::to_string(game.total_dim()));
  if (!x.allFinite()) throw InvalidArgument("joint action is not finite");
}

double cost(const Game& game, int i, const Eigen::VectorXd& x) {
  check_point(game, i, x);
  if (game.is_quadratic()) {
    const auto& q = game.quadratic_payload();
    return x.dot(q.Q[i] * x) + q.r[i].dot(x);
  }
  return blotto_cost(game.blotto_payload(), i, x);
}

Eigen::VectorXd cost_grad(const Game& game, int i, const Eigen::VectorXd& x) {
  check_point(game, i, x);
  if (game.is_quadratic()) {
    const auto& q = game.quadratic_payload();
    return q.Q[i] * x + q.Q[i].transpose() * x + q.r[i];
  }
  return blotto_grad(game.blotto_payload(), i, x);
}

Eigen::VectorXd cost_hvp(const Game& game, int i, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& v, double eps0) {
  check_point(game, i, x);
  if (v.size() != x.size()) throw InvalidArgument("HVP direction has wrong length");
  if (!v.allFinite()) throw InvalidArgument("HVP direction is not finite");
  if (game.is_quadratic()) {
    const auto& q = game.quadratic_payload();
    return q.Q[i] * v + q.Q[i].transpose() * v;
  }
  const double vnorm = v.norm();
  if (vnorm == 0.0) return Eigen::VectorXd::Zero(x.size());
  const double eps = eps0 * (1.0 + x.norm()) / vnorm;
  Eigen::VectorXd out = (cost_grad(game, i, x + eps * v) - cost_grad(game, i, x - eps * v)) /
                        (2.0 * eps);
  if (!out.allFinite()) throw NumericalError("non-finite HVP quotient", i);
  return out;
}

Eigen::RowVectorXd cost_batch(const Game& game, int i, const Eigen::MatrixXd& X) {
  if (i < 0 || i >= game.num_players()) throw InvalidArgument("player index out of range");
  if (X.rows() != game.total_dim()) throw InvalidArgument("batched action has wrong row count");
  if (game.is_quadratic()) {
    const auto& q = game.quadratic_payload();
    return (X.array() * (q.Q[i] * X).array()).colwise().sum().matrix() +
           q.r[i].transpose() * X;
  }
  Eigen::RowVectorXd out(X.cols());
  for (Eigen::Index b = 0; b < X.cols(); ++b)
    out(b) = blotto_cost(game.blotto_payload(), i, X.col(b));
  return out;
}

Eigen::MatrixXd cost_grad_batch(const Game& game, int i, const Eigen::MatrixXd& X) {
  if (i < 0 || i >= game.num_players()) throw InvalidArgument("player index out of range");
  if (X.rows() != game.total_dim()) throw InvalidArgument("batched action has wrong row count");
  if (game.is_quadratic()) {
    const auto& q = game.quadratic_payload();
    Eigen::MatrixXd G = (q.Q[i] + q.Q[i].transpose()) * X;
    G.colwise() += q.r[i];
    return G;
  }
  Eigen::MatrixXd G(X.rows(), X.cols());
  for (Eigen::Index b = 0; b < X.cols(); ++b)
    G.col(b) = blotto_grad(game.blotto_payload(), i, X.col(b));
  return G;
}

Eigen::VectorXd feasible_map(const Game& game, int i, const Eigen::VectorXd& z) {
  const auto& b = game.blotto_payload();
  if (i < 0 || i > 1) throw InvalidArgument("Blotto player index out of range");
  if (z.size() != b.battlefields + 1) throw InvalidArgument("raw Blotto vector has wrong length");
  if (!z.allFinite()) throw InvalidArgument("raw Blotto vector is not finite");
  return b.budgets[i] * floored(normexp(z)).head(b.battlefields);
}

Game gen_quadratic(std::uint64_t seed, int n_i, EntryDist dist) {
  if (n_i < 1) throw InvalidArgument("n_i must be >= 1");
  Rng rng(seed);
  const int n = 2 * n_i;
  // Draw order: Q_1, Q_2 (row-major), then r_1, r_2.
  std::vector<Eigen::MatrixXd> Q;
  std::vector<Eigen::VectorXd> r;
  for (int i = 0; i < 2; ++i) Q.push_back(draw_matrix(rng, n, dist));
  for (int i = 0; i < 2; ++i) r.push_back(draw_vector(rng, n, dist));
  Game g = Game::quadratic({n_i, n_i}, std::move(Q), std::move(r));
  g.seed = seed;
  g.dist = dist;
  return g;
}

Game gen_blotto(std::uint64_t seed, int battlefields) {
  Rng rng(seed);
  auto open_uniform = [&rng] {
    double u = rng.uniform();
    while (u == 0.0) u = rng.uniform();
    return u;
  };
  const double a = open_uniform();
  const double b = open_uniform();
  Game g = Game::blotto(battlefields, a, b);
  g.seed = seed;
  return g;
}

Game gen_gamut(std::uint64_t seed, int num_players, int n_i, EntryDist dist) {
  if (num_players < 2) throw InvalidArgument("multi-player game needs N >= 2");
  if (n_i < 1) throw InvalidArgument("n_i must be >= 1");
  Rng rng(seed);
  const int n = num_players * n_i;
  std::vector<Eigen::MatrixXd> Q;
  std::vector<Eigen::VectorXd> r;
  for (int i = 0; i < num_players; ++i) {
    Q.push_back(draw_matrix(rng, n, dist));
    r.push_back(Eigen::VectorXd::Zero(n));
  }
  Game g = Game::quadratic(std::vector<int>(num_players, n_i), std::move(Q), std::move(r),
                           GameKind::MultiQuadratic);
  g.seed = seed;
  g.dist = dist;
  return g;
}

Game gen_convex_quadratic(std::uint64_t seed, int n_i) {
  if (n_i < 1) throw InvalidArgument("n_i must be >= 1");
  Rng rng(seed);
  const int n = 2 * n_i;
  std::vector<Eigen::MatrixXd> Q;
  std::vector<Eigen::VectorXd> r;
  for (int i = 0; i < 2; ++i) {
    Eigen::MatrixXd q = draw_matrix(rng, n, EntryDist::Uniform01);
    const Eigen::MatrixXd b = draw_matrix(rng, n_i, EntryDist::Uniform01);
    q.block(i * n_i, i * n_i, n_i, n_i) =
        5.0 * Eigen::MatrixXd::Identity(n_i, n_i) + b * b.transpose() / n_i;
    Q.push_back(std::move(q));
  }
  for (int i = 0; i < 2; ++i) r.push_back(draw_vector(rng, n, EntryDist::Uniform01));
  Game g = Game::quadratic({n_i, n_i}, std::move(Q), std::move(r));
  g.seed = seed;
  return g;
}

Eigen::VectorXd quadratic_stationary_point(const Game& game) {
  const auto& q = game.quadratic_payload();
  const int n = game.total_dim();
  Eigen::MatrixXd J(n, n);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < game.num_players(); ++i) {
    const Eigen::MatrixXd H = q.Q[i] + q.Q[i].transpose();
    J.middleRows(game.offset(i), game.dim(i)) = H.middleRows(game.offset(i), game.dim(i));
    rhs.segment(game.offset(i), game.dim(i)) = -q.r[i].segment(game.offset(i), game.dim(i));
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
  if (!lu.isInvertible()) throw InvalidArgument("stationarity system is singular");
  return lu.solve(rhs);
}

double gradient_lipschitz(const Game& game) {
  const auto& q = game.quadratic_payload();
  double best = 0.0;
  for (const auto& Qi : q.Q) {
    const Eigen::MatrixXd H = Qi + Qi.transpose();
    best = std::max(best, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H, Eigen::EigenvaluesOnly)
                              .eigenvalues()
                              .cwiseAbs()
                              .maxCoeff());
  }
  return best;
}

nlohmann::json game_to_json(const Game& game) {
  nlohmann::json doc;
  doc["kind"] = to_string(game.kind());
  doc["seed"] = game.seed ? nlohmann::json(*game.seed) : nlohmann::json(nullptr);
  doc["dims"] = game.dims();
  if (game.dist) doc["dist_id"] = to_string(*game.dist);
  if (game.is_quadratic()) {
    const auto& q = game.quadratic_payload();
    nlohmann::json Qs = nlohmann::json::array();
    nlohmann::json rs = nlohmann::json::array();
    for (std::size_t i = 0; i < q.Q.size(); ++i) {
      nlohmann::json rows = nlohmann::json::array();
      for (Eigen::Index row = 0; row < q.Q[i].rows(); ++row) {
        std::vector<double> vals(q.Q[i].cols());
        for (Eigen::Index col = 0; col < q.Q[i].cols(); ++col) vals[col] = q.Q[i](row, col);
        rows.push_back(vals);
      }
      Qs.push_back(std::move(rows));
      rs.push_back(std::vector<double>(q.r[i].data(), q.r[i].data() + q.r[i].size()));
    }
    doc["Q"] = std::move(Qs);
    doc["r"] = std::move(rs);
  } else {
    const auto& b = game.blotto_payload();
    doc["battlefields"] = b.battlefields;
    doc["budgets"] = {b.budgets[0], b.budgets[1]};
  }
  return doc;
}

Game game_from_json(const nlohmann::json& doc) {
  const GameKind kind = parse_game_kind(doc.at("kind").get<std::string>());
  Game g = [&] {
    if (kind == GameKind::Blotto) {
      const auto& budgets = doc.at("budgets");
      return Game::blotto(doc.at("battlefields").get<int>(), budgets.at(0).get<double>(),
                          budgets.at(1).get<double>());
    }
    auto dims = doc.at("dims").get<std::vector<int>>();
    const int n = std::accumulate(dims.begin(), dims.end(), 0);
    std::vector<Eigen::MatrixXd> Q;
    std::vector<Eigen::VectorXd> r;
    for (const auto& rows : doc.at("Q")) {
      if (static_cast<int>(rows.size()) != n) throw InvalidArgument("Q has wrong row count");
      Eigen::MatrixXd m(n, n);
      for (int row = 0; row < n; ++row) {
        const auto vals = rows.at(row).get<std::vector<double>>();
        if (static_cast<int>(vals.size()) != n) throw InvalidArgument("Q has wrong column count");
        for (int col = 0; col < n; ++col) m(row, col) = vals[col];
      }
      Q.push_back(std::move(m));
    }
    for (const auto& vals : doc.at("r")) {
      const auto v = vals.get<std::vector<double>>();
      r.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    return Game::quadratic(std::move(dims), std::move(Q), std::move(r), kind);
  }();
  if (doc.contains("seed") && !doc["seed"].is_null()) g.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("dist_id")) g.dist = parse_entry_dist(doc["dist_id"].get<std::string>());
  return g;
}

}  // namespace mixnash
