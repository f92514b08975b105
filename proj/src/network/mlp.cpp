#include "kpinn/network/mlp.hpp"

#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "kpinn/autodiff/jets.hpp"
#include "kpinn/core/error.hpp"
#include "kpinn/core/rng.hpp"

namespace kpinn {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Tanh:
      return "tanh";
    case Activation::Sigmoid:
      return "sigmoid";
    case Activation::None:
      return "none";
  }
  return "none";
}

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "none" || name == "linear") return Activation::None;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::size_t MlpParams::input_dim() const {
  if (layers.empty()) throw ShapeError("network has no layers");
  return static_cast<std::size_t>(layers.front().weight.cols());
}

std::size_t MlpParams::output_dim() const {
  if (layers.empty()) throw ShapeError("network has no layers");
  return static_cast<std::size_t>(layers.back().weight.rows());
}

std::size_t MlpParams::num_params() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  return n;
}

void MlpParams::validate() const {
  if (layers.empty()) throw ShapeError("network has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.bias.size() != layer.weight.rows()) {
      throw ShapeError("layer " + std::to_string(l + 1) + ": bias length does not match rows");
    }
    if (l > 0 && layer.weight.cols() != layers[l - 1].weight.rows()) {
      throw ShapeError("layer " + std::to_string(l + 1) + ": input dimension does not chain");
    }
  }
}

std::size_t MlpParams::flat_offset(std::size_t l) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < l; ++i) {
    n += static_cast<std::size_t>(layers[i].weight.size() + layers[i].bias.size());
  }
  return n;
}

Eigen::VectorXd MlpParams::flatten() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(num_params()));
  Eigen::Index k = 0;
  for (const auto& layer : layers) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) flat[k++] = layer.weight(r, c);
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) flat[k++] = layer.bias[r];
  }
  return flat;
}

MlpParams MlpParams::with_flat(const Eigen::VectorXd& flat) const {
  if (static_cast<std::size_t>(flat.size()) != num_params()) {
    throw ShapeError("flat parameter vector has wrong length");
  }
  MlpParams out = *this;
  Eigen::Index k = 0;
  for (auto& layer : out.layers) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = flat[k++];
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias[r] = flat[k++];
  }
  return out;
}

InputNormalizer::InputNormalizer(Eigen::VectorXd lo, Eigen::VectorXd hi)
    : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size() || lo_.size() == 0) throw ShapeError("normalizer bounds mismatch");
  for (Eigen::Index i = 0; i < lo_.size(); ++i) {
    if (!(hi_[i] > lo_[i])) throw DomainError("normalizer box has empty extent");
  }
}

InputNormalizer InputNormalizer::unit_box(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return InputNormalizer(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n));
}

Eigen::VectorXd InputNormalizer::apply(std::span<const double> x) const {
  Eigen::VectorXd y(lo_.size());
  for (Eigen::Index i = 0; i < lo_.size(); ++i) {
    y[i] = scale(static_cast<std::size_t>(i)) * x[static_cast<std::size_t>(i)] +
           shift(static_cast<std::size_t>(i));
  }
  return y;
}

bool InputNormalizer::contains(std::span<const double> x, double tol) const {
  if (x.size() != static_cast<std::size_t>(lo_.size())) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (!(x[i] >= lo_[ii] - tol && x[i] <= hi_[ii] + tol)) return false;
  }
  return true;
}

MlpParams init_glorot(const std::vector<std::size_t>& dims,
                      const std::vector<Activation>& activations, std::uint64_t seed) {
  if (dims.size() < 2) throw ShapeError("init_glorot needs at least input and output dims");
  if (activations.size() != dims.size() - 1) {
    throw ShapeError("need one activation per layer");
  }
  Rng rng(seed);
  MlpParams params;
  params.seed = seed;
  for (std::size_t l = 1; l < dims.size(); ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(dims[l - 1] + dims[l]));
    DenseLayer layer;
    layer.weight.resize(static_cast<Eigen::Index>(dims[l]), static_cast<Eigen::Index>(dims[l - 1]));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        layer.weight(r, c) = rng.uniform(-limit, limit);
      }
    }
    layer.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dims[l]));
    layer.activation = activations[l - 1];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(layer.weight);
    if (svd.singularValues().minCoeff() <= 1e-10) {
      throw NumericError("Glorot draw for layer " + std::to_string(l) + " is rank deficient");
    }
    params.layers.push_back(std::move(layer));
  }
  return params;
}

JetBatch forward(const MlpParams& params, const InputNormalizer& normalizer, const Tensor& x,
                 int order) {
  return propagate_jets(params, normalizer, x, order);
}

Tensor evaluate(const MlpParams& params, const InputNormalizer& normalizer, const Tensor& x) {
  params.validate();
  if (x.rank() != 2 || x.dim(1) != params.input_dim()) throw ShapeError("evaluate: bad input shape");
  Tensor out({x.dim(0), params.output_dim()});
  for (std::size_t b = 0; b < x.dim(0); ++b) {
    const auto row = x.row(b);
    if (!normalizer.contains(row)) throw DomainError("evaluate: point outside domain box");
    Eigen::VectorXd a = normalizer.apply(row);
    for (const auto& layer : params.layers) {
      Eigen::VectorXd z = layer.weight * a + layer.bias;
      switch (layer.activation) {
        case Activation::Tanh:
          a = z.array().tanh();
          break;
        case Activation::Sigmoid:
          a = (1.0 + (-z.array()).exp()).inverse();
          break;
        case Activation::None:
          a = z;
          break;
      }
    }
    for (std::size_t o = 0; o < params.output_dim(); ++o) out(b, o) = a[static_cast<Eigen::Index>(o)];
  }
  out.require_finite("network evaluation");
  return out;
}

}  // namespace kpinn
