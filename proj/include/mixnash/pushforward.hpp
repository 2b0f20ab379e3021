#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "mixnash/rng.hpp"

namespace mixnash {

enum class Activation { Identity, Tanh, Relu };
enum class GeneratorKind { Net, Constant };

std::string to_string(Activation act);
std::string to_string(GeneratorKind kind);
Activation parse_activation(const std::string& name);
GeneratorKind parse_generator_kind(const std::string& name);

// Default hidden architecture of the pushforward nets. The output layer is
// linear and sized to the player's action dimension.
inline const std::vector<int> kDefaultHidden{20, 40, 160, 160, 40, 20};
inline const std::vector<Activation> kDefaultActivations{
    Activation::Tanh, Activation::Tanh, Activation::Tanh,
    Activation::Relu, Activation::Tanh, Activation::Tanh};

// Map from the latent cube [0,1]^d to a player's action space. A Net is a
// fully connected network whose parameters live in one flat vector, layer by
// layer, each layer as its weight matrix (column-major, out x in) followed by
// its bias. A Constant ignores its input and represents a pure strategy; its
// flat parameter vector is the action itself.
class Generator {
 public:
  static Generator constant(Eigen::VectorXd value, int latent_dim = 1);
  // layer_sizes = [d, hidden..., n_i]; one activation per hidden layer.
  static Generator net(std::vector<int> layer_sizes, std::vector<Activation> activations,
                       Eigen::VectorXd params);

  GeneratorKind kind() const { return kind_; }
  bool is_constant() const { return kind_ == GeneratorKind::Constant; }
  int latent_dim() const { return latent_dim_; }
  int output_dim() const { return output_dim_; }
  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  const std::vector<Activation>& activations() const { return activations_; }
  const Eigen::VectorXd& params() const { return params_; }
  Eigen::Index num_params() const { return params_.size(); }

  Generator with_params(Eigen::VectorXd params) const;

  int num_layers() const { return static_cast<int>(layer_sizes_.size()) - 1; }
  Eigen::Map<const Eigen::MatrixXd> weight(int layer) const;
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;
  Eigen::Index weight_offset(int layer) const { return offsets_.at(layer); }

 private:
  Generator() = default;

  GeneratorKind kind_ = GeneratorKind::Constant;
  int latent_dim_ = 0;
  int output_dim_ = 0;
  std::vector<int> layer_sizes_;
  std::vector<Activation> activations_;
  std::vector<Eigen::Index> offsets_;
  Eigen::VectorXd params_;
};

Eigen::Index net_param_count(const std::vector<int>& layer_sizes);

// Paper-default architecture for Net; Uniform(-0.5, 0.5) values for Constant.
Generator init_generator(GeneratorKind kind, int latent_dim, int n_i, std::uint64_t seed);
// Net with custom hidden layers. Weights ~ U(-a, a), a = sqrt(6 / (fan_in + fan_out)),
// biases zero.
Generator init_net(int latent_dim, int n_i, const std::vector<int>& hidden,
                   const std::vector<Activation>& activations, std::uint64_t seed);

// Latent samples, one column per sample (d x B), entries in [0, 1].
struct OmegaBatch {
  Eigen::MatrixXd samples;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(samples.cols()); }
  int dim() const { return static_cast<int>(samples.rows()); }
};

OmegaBatch sample_omega(Rng& rng, int batch, int latent_dim, std::uint64_t seed_tag = 0);

// Post-activation values of every layer for one batch; layers[0] is the input.
struct ForwardTrace {
  std::vector<Eigen::MatrixXd> layers;
  const Eigen::MatrixXd& output() const { return layers.back(); }
};

Eigen::VectorXd forward(const Generator& gen, const Eigen::VectorXd& omega);
Eigen::MatrixXd forward_batch(const Generator& gen, const Eigen::MatrixXd& omega);
ForwardTrace forward_trace(const Generator& gen, const Eigen::MatrixXd& omega);

// Reverse pass: sum over batch columns of (d forward / d params)^T upstream.
Eigen::VectorXd backward(const Generator& gen, const ForwardTrace& trace,
                         const Eigen::MatrixXd& upstream);

Eigen::VectorXd vjp_params(const Generator& gen, const Eigen::VectorXd& omega,
                           const Eigen::VectorXd& upstream);
// Summed over the batch.
Eigen::VectorXd vjp_params_batch(const Generator& gen, const Eigen::MatrixXd& omega,
                                 const Eigen::MatrixXd& upstream);

// params + scale * direction; the input is left untouched.
Generator axpy_params(const Generator& gen, const Eigen::VectorXd& direction, double scale);

nlohmann::json generator_to_json(const Generator& gen);
Generator generator_from_json(const nlohmann::json& doc);

}  // namespace mixnash
