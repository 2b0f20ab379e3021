#include "mixnash/pushforward.hpp"

#include <cmath>

#include "mixnash/errors.hpp"

namespace mixnash {

namespace {

// tanh through the vectorized exp; libm tanh is scalar and dominates the
// forward pass otherwise. Absolute error stays within a few ulp of 1.
void fast_tanh(Eigen::MatrixXd& a) {
  a = (1.0 - 2.0 / ((2.0 * a.array()).exp() + 1.0)).matrix();
}

void apply_activation(Activation act, Eigen::MatrixXd& a) {
  switch (act) {
    case Activation::Identity: break;
    case Activation::Tanh: fast_tanh(a); break;
    case Activation::Relu: a = a.cwiseMax(0.0); break;
  }
}

// Derivative expressed through the post-activation value. ReLU'(0) = 0.
void scale_by_derivative(Activation act, const Eigen::MatrixXd& post, Eigen::MatrixXd& delta) {
  switch (act) {
    case Activation::Identity: break;
    case Activation::Tanh: delta.array() *= 1.0 - post.array().square(); break;
    case Activation::Relu: delta.array() *= (post.array() > 0.0).cast<double>(); break;
  }
}

void check_latent(const Generator& gen, Eigen::Index rows) {
  if (!gen.is_constant() && rows != gen.latent_dim())
    throw InvalidArgument("latent sample has dimension " + std::to_string(rows) +
                          ", generator expects " + std::to_string(gen.latent_dim()));
}

}  // namespace

std::string to_string(Activation act) {
  switch (act) {
    case Activation::Identity: return "identity";
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
  }
  return "?";
}

std::string to_string(GeneratorKind kind) {
  return kind == GeneratorKind::Net ? "net" : "constant";
}

Activation parse_activation(const std::string& name) {
  if (name == "identity") return Activation::Identity;
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  throw InvalidArgument("unknown activation '" + name + "'");
}

GeneratorKind parse_generator_kind(const std::string& name) {
  if (name == "net") return GeneratorKind::Net;
  if (name == "constant") return GeneratorKind::Constant;
  throw InvalidArgument("unknown generator kind '" + name + "'");
}

Eigen::Index net_param_count(const std::vector<int>& layer_sizes) {
  Eigen::Index total = 0;
  for (std::size_t l = 1; l < layer_sizes.size(); ++l)
    total += static_cast<Eigen::Index>(layer_sizes[l - 1]) * layer_sizes[l] + layer_sizes[l];
  return total;
}

Generator Generator::constant(Eigen::VectorXd value, int latent_dim) {
  if (value.size() < 1) throw InvalidArgument("constant generator needs n_i >= 1");
  if (!value.allFinite()) throw InvalidArgument("constant generator value is not finite");
  Generator g;
  g.kind_ = GeneratorKind::Constant;
  g.latent_dim_ = latent_dim;
  g.output_dim_ = static_cast<int>(value.size());
  g.params_ = std::move(value);
  return g;
}

Generator Generator::net(std::vector<int> layer_sizes, std::vector<Activation> activations,
                         Eigen::VectorXd params) {
  if (layer_sizes.size() < 2) throw InvalidArgument("net needs input and output sizes");
  for (int s : layer_sizes)
    if (s < 1) throw InvalidArgument("layer sizes must be >= 1");
  if (activations.size() != layer_sizes.size() - 2)
    throw InvalidArgument("need one activation per hidden layer");
  if (params.size() != net_param_count(layer_sizes))
    throw InvalidArgument("flat parameter vector has length " + std::to_string(params.size()) +
                          ", architecture needs " +
                          std::to_string(net_param_count(layer_sizes)));
  Generator g;
  g.kind_ = GeneratorKind::Net;
  g.latent_dim_ = layer_sizes.front();
  g.output_dim_ = layer_sizes.back();
  Eigen::Index offset = 0;
  for (std::size_t l = 1; l < layer_sizes.size(); ++l) {
    g.offsets_.push_back(offset);
    offset += static_cast<Eigen::Index>(layer_sizes[l - 1]) * layer_sizes[l] + layer_sizes[l];
  }
  g.layer_sizes_ = std::move(layer_sizes);
  g.activations_ = std::move(activations);
  g.params_ = std::move(params);
  return g;
}

Generator Generator::with_params(Eigen::VectorXd params) const {
  if (params.size() != params_.size())
    throw InvalidArgument("parameter vector length mismatch");
  Generator g = *this;
  g.params_ = std::move(params);
  return g;
}

Eigen::Map<const Eigen::MatrixXd> Generator::weight(int layer) const {
  const int in = layer_sizes_[layer];
  const int out = layer_sizes_[layer + 1];
  return {params_.data() + offsets_[layer], out, in};
}

Eigen::Map<const Eigen::VectorXd> Generator::bias(int layer) const {
  const int in = layer_sizes_[layer];
  const int out = layer_sizes_[layer + 1];
  return {params_.data() + offsets_[layer] + static_cast<Eigen::Index>(in) * out, out};
}

Generator init_net(int latent_dim, int n_i, const std::vector<int>& hidden,
                   const std::vector<Activation>& activations, std::uint64_t seed) {
  if (latent_dim < 1 || n_i < 1) throw InvalidArgument("d and n_i must be >= 1");
  std::vector<int> sizes{latent_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(n_i);
  Eigen::VectorXd params = Eigen::VectorXd::Zero(net_param_count(sizes));
  Rng rng(seed);
  Eigen::Index offset = 0;
  for (std::size_t l = 1; l < sizes.size(); ++l) {
    const Eigen::Index count = static_cast<Eigen::Index>(sizes[l - 1]) * sizes[l];
    const double a = std::sqrt(6.0 / static_cast<double>(sizes[l - 1] + sizes[l]));
    for (Eigen::Index k = 0; k < count; ++k) params(offset + k) = rng.uniform(-a, a);
    offset += count + sizes[l];
  }
  return Generator::net(std::move(sizes), activations, std::move(params));
}

Generator init_generator(GeneratorKind kind, int latent_dim, int n_i, std::uint64_t seed) {
  if (latent_dim < 1 || n_i < 1) throw InvalidArgument("d and n_i must be >= 1");
  if (kind == GeneratorKind::Net)
    return init_net(latent_dim, n_i, kDefaultHidden, kDefaultActivations, seed);
  Rng rng(seed);
  Eigen::VectorXd c(n_i);
  for (int k = 0; k < n_i; ++k) c(k) = rng.uniform(-0.5, 0.5);
  return Generator::constant(std::move(c), latent_dim);
}

OmegaBatch sample_omega(Rng& rng, int batch, int latent_dim, std::uint64_t seed_tag) {
  if (batch < 1 || latent_dim < 1) throw InvalidArgument("batch and d must be >= 1");
  OmegaBatch out;
  out.seed = seed_tag;
  out.samples.resize(latent_dim, batch);
  for (int b = 0; b < batch; ++b)
    for (int k = 0; k < latent_dim; ++k) out.samples(k, b) = rng.uniform();
  return out;
}

ForwardTrace forward_trace(const Generator& gen, const Eigen::MatrixXd& omega) {
  check_latent(gen, omega.rows());
  ForwardTrace trace;
  if (gen.is_constant()) {
    trace.layers.push_back(gen.params().replicate(1, omega.cols()));
    return trace;
  }
  trace.layers.reserve(gen.num_layers() + 1);
  trace.layers.push_back(omega);
  for (int l = 0; l < gen.num_layers(); ++l) {
    Eigen::MatrixXd a = gen.weight(l) * trace.layers.back();
    a.colwise() += gen.bias(l);
    if (l + 1 < gen.num_layers()) apply_activation(gen.activations()[l], a);
    trace.layers.push_back(std::move(a));
  }
  return trace;
}

Eigen::MatrixXd forward_batch(const Generator& gen, const Eigen::MatrixXd& omega) {
  ForwardTrace t = forward_trace(gen, omega);
  return std::move(t.layers.back());
}

Eigen::VectorXd forward(const Generator& gen, const Eigen::VectorXd& omega) {
  return forward_batch(gen, omega);
}

Eigen::VectorXd backward(const Generator& gen, const ForwardTrace& trace,
                         const Eigen::MatrixXd& upstream) {
  if (upstream.rows() != gen.output_dim() || upstream.cols() != trace.output().cols())
    throw InvalidArgument("upstream shape does not match generator output");
  if (gen.is_constant()) return upstream.rowwise().sum();
  Eigen::VectorXd grad(gen.num_params());
  Eigen::MatrixXd delta = upstream;
  for (int l = gen.num_layers() - 1; l >= 0; --l) {
    const int in = gen.layer_sizes()[l];
    const int out = gen.layer_sizes()[l + 1];
    const Eigen::MatrixXd& prev = trace.layers[l];
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + gen.weight_offset(l), out, in);
    gw.noalias() = delta * prev.transpose();
    grad.segment(gen.weight_offset(l) + static_cast<Eigen::Index>(in) * out, out) =
        delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd next = gen.weight(l).transpose() * delta;
      scale_by_derivative(gen.activations()[l - 1], prev, next);
      delta = std::move(next);
    }
  }
  return grad;
}

Eigen::VectorXd vjp_params_batch(const Generator& gen, const Eigen::MatrixXd& omega,
                                 const Eigen::MatrixXd& upstream) {
  if (upstream.cols() != omega.cols())
    throw InvalidArgument("upstream and latent batch sizes differ");
  return backward(gen, forward_trace(gen, omega), upstream);
}

Eigen::VectorXd vjp_params(const Generator& gen, const Eigen::VectorXd& omega,
                           const Eigen::VectorXd& upstream) {
  return vjp_params_batch(gen, omega, upstream);
}

Generator axpy_params(const Generator& gen, const Eigen::VectorXd& direction, double scale) {
  if (direction.size() != gen.num_params())
    throw InvalidArgument("direction length " + std::to_string(direction.size()) +
                          " does not match parameter length " +
                          std::to_string(gen.num_params()));
  return gen.with_params(gen.params() + scale * direction);
}

nlohmann::json generator_to_json(const Generator& gen) {
  nlohmann::json doc;
  doc["variant"] = to_string(gen.kind());
  doc["d"] = gen.latent_dim();
  doc["n_i"] = gen.output_dim();
  doc["layer_sizes"] = gen.layer_sizes();
  std::vector<std::string> acts;
  for (Activation a : gen.activations()) acts.push_back(to_string(a));
  doc["activations"] = acts;
  doc["params"] = std::vector<double>(gen.params().data(), gen.params().data() + gen.num_params());
  return doc;
}

Generator generator_from_json(const nlohmann::json& doc) {
  const auto params = doc.at("params").get<std::vector<double>>();
  Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(params.data(),
                                                        static_cast<Eigen::Index>(params.size()));
  if (parse_generator_kind(doc.at("variant").get<std::string>()) == GeneratorKind::Constant)
    return Generator::constant(std::move(p), doc.at("d").get<int>());
  std::vector<Activation> acts;
  for (const auto& a : doc.at("activations")) acts.push_back(parse_activation(a.get<std::string>()));
  return Generator::net(doc.at("layer_sizes").get<std::vector<int>>(), std::move(acts),
                        std::move(p));
}

}  // namespace mixnash
