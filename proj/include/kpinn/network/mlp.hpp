#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "kpinn/core/tensor.hpp"

namespace kpinn {

struct JetBatch;

enum class Activation { Tanh, Sigmoid, None };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

/// One affine map followed by an elementwise activation.
struct DenseLayer {
  Eigen::MatrixXd weight;  // d_l x d_{l-1}
  Eigen::VectorXd bias;    // d_l
  Activation activation = Activation::Tanh;
};

/// Feed-forward network u(x) = W_L s_{L-1}(... s_1(W_1 x + b_1) ...) + b_L.
///
/// Flat parameter order (used by gradients and the optimizer): for each layer,
/// the weight matrix in row-major order followed by the bias.
struct MlpParams {
  std::vector<DenseLayer> layers;
  std::uint64_t seed = 0;

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t num_layers() const { return layers.size(); }
  std::size_t num_params() const;

  /// Throws ShapeError if consecutive dimensions do not chain.
  void validate() const;

  Eigen::VectorXd flatten() const;
  /// Returns a copy with parameters replaced by `flat` (same layout as flatten()).
  MlpParams with_flat(const Eigen::VectorXd& flat) const;
  /// Offset of layer `l`'s weight block inside the flat vector.
  std::size_t flat_offset(std::size_t l) const;
};

/// Per-coordinate affine map sending the domain box onto [-1, 1]^d.
class InputNormalizer {
 public:
  InputNormalizer() = default;
  InputNormalizer(Eigen::VectorXd lo, Eigen::VectorXd hi);
  /// [0,1]^d, giving the map x -> 2x - 1.
  static InputNormalizer unit_box(std::size_t dim);

  std::size_t dim() const { return static_cast<std::size_t>(lo_.size()); }
  const Eigen::VectorXd& lo() const { return lo_; }
  const Eigen::VectorXd& hi() const { return hi_; }
  double scale(std::size_t i) const { return 2.0 / (hi_[i] - lo_[i]); }
  double shift(std::size_t i) const { return -(hi_[i] + lo_[i]) / (hi_[i] - lo_[i]); }

  Eigen::VectorXd apply(std::span<const double> x) const;
  bool contains(std::span<const double> x, double tol = 1e-12) const;

 private:
  Eigen::VectorXd lo_;
  Eigen::VectorXd hi_;
};

/// Glorot-uniform weights U[-sqrt(6/(fan_in+fan_out)), +...], zero biases.
/// `dims` lists d_0 ... d_L; `activations` has one entry per layer.
MlpParams init_glorot(const std::vector<std::size_t>& dims,
                      const std::vector<Activation>& activations, std::uint64_t seed);

/// Jets of u with derivatives taken with respect to the physical input.
/// Rejects points outside the normalizer's box.
JetBatch forward(const MlpParams& params, const InputNormalizer& normalizer, const Tensor& x,
                 int order);

/// Plain layer-by-layer evaluation (no jets), shape (batch, d_L).
Tensor evaluate(const MlpParams& params, const InputNormalizer& normalizer, const Tensor& x);

}  // namespace kpinn
