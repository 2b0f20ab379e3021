#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace mixnash {

enum class GameKind { Quadratic, Blotto, MultiQuadratic };

// Entry distributions for randomly generated payoff matrices. The multi-player
// family draws every entry of an instance from one of these.
enum class EntryDist { Uniform01, UniformSym, Normal, Exponential, Discrete3 };

std::string to_string(GameKind kind);
std::string to_string(EntryDist dist);
GameKind parse_game_kind(const std::string& name);
EntryDist parse_entry_dist(const std::string& name);

// f_i(x) = x^T Q_i x + r_i^T x over the joint vector x.
struct QuadraticPayload {
  std::vector<Eigen::MatrixXd> Q;
  std::vector<Eigen::VectorXd> r;
};

// Two colonels, m battlefields, budgets X_1 <= X_2. Each player controls a raw
// vector of length m + 1 that is mapped onto the feasible allocations.
struct BlottoPayload {
  int battlefields = 0;
  double budgets[2] = {0.0, 0.0};
};

// Immutable after construction. Players minimize cost.
class Game {
 public:
  static Game quadratic(std::vector<int> dims, std::vector<Eigen::MatrixXd> Q,
                        std::vector<Eigen::VectorXd> r,
                        GameKind kind = GameKind::Quadratic);
  static Game blotto(int battlefields, double budget1, double budget2);

  GameKind kind() const { return kind_; }
  int num_players() const { return static_cast<int>(dims_.size()); }
  const std::vector<int>& dims() const { return dims_; }
  int dim(int i) const { return dims_.at(i); }
  int offset(int i) const { return offsets_.at(i); }
  int total_dim() const { return total_; }

  const QuadraticPayload& quadratic_payload() const;
  const BlottoPayload& blotto_payload() const;
  bool is_quadratic() const { return std::holds_alternative<QuadraticPayload>(payload_); }

  // Provenance, carried through serialization.
  std::optional<std::uint64_t> seed;
  std::optional<EntryDist> dist;

 private:
  Game() = default;
  void set_dims(std::vector<int> dims);

  GameKind kind_ = GameKind::Quadratic;
  std::vector<int> dims_;
  std::vector<int> offsets_;
  int total_ = 0;
  std::variant<QuadraticPayload, BlottoPayload> payload_;
};

double cost(const Game& game, int i, const Eigen::VectorXd& x);
Eigen::VectorXd cost_grad(const Game& game, int i, const Eigen::VectorXd& x);

// Hessian-vector product. Exact for quadratic games; otherwise a central
// difference of cost_grad with step eps0 * (1 + |x|) / |v|.
Eigen::VectorXd cost_hvp(const Game& game, int i, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& v, double eps0 = 1e-5);

// Column-batched variants: each column of X is one joint action.
Eigen::RowVectorXd cost_batch(const Game& game, int i, const Eigen::MatrixXd& X);
Eigen::MatrixXd cost_grad_batch(const Game& game, int i, const Eigen::MatrixXd& X);

// Blotto raw parameters -> allocation, x = X_i * w[0..m) where w is the
// exponential normalization of z over all m + 1 coordinates (the last is
// slack), blended with a 1e-12 uniform floor so every allocation stays
// strictly positive and strictly under budget even when exp underflows.
Eigen::VectorXd feasible_map(const Game& game, int i, const Eigen::VectorXd& z);

Game gen_quadratic(std::uint64_t seed, int n_i, EntryDist dist = EntryDist::Uniform01);
Game gen_blotto(std::uint64_t seed, int battlefields);
Game gen_gamut(std::uint64_t seed, int num_players, int n_i, EntryDist dist);

// Two-player quadratic game that is strongly convex in each player's own
// action: own blocks 5 I + B B^T / n_i, everything else U[0,1]. Used as the
// closed-form Nash oracle family.
Game gen_convex_quadratic(std::uint64_t seed, int n_i);

// Solves grad_i f_i(x) = 0 for all i (stacked own-gradient rows). Quadratic
// games only; throws when the system is singular.
Eigen::VectorXd quadratic_stationary_point(const Game& game);

// max_i |Q_i + Q_i^T|_2 for quadratic games.
double gradient_lipschitz(const Game& game);

// Validates i and finiteness of x; throws InvalidArgument.
void check_point(const Game& game, int i, const Eigen::VectorXd& x);

nlohmann::json game_to_json(const Game& game);
Game game_from_json(const nlohmann::json& doc);

}  // namespace mixnash
