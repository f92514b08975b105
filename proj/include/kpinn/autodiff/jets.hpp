#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "kpinn/core/tensor.hpp"
#include "kpinn/network/mlp.hpp"

namespace kpinn {

/// Value, input-Jacobian and input-Hessian of a network output for a batch.
///   value    (batch, out)
///   jacobian (batch, out, in)
///   hessian  (batch, out, in, in), symmetric in the last two indices
/// Lower-order fields are empty when the requested order is smaller.
struct JetBatch {
  Tensor value;
  Tensor jacobian;
  Tensor hessian;
  int order = 0;
  std::size_t input_dim = 0;

  std::size_t batch() const { return value.dim(0); }
  std::size_t out_dim() const { return value.dim(1); }

  /// Zero-filled jets of the given shape; used as adjoint seeds.
  static JetBatch zeros(std::size_t batch, std::size_t out, std::size_t in, int order);
};

/// Number of stored jet components per point: value, d first derivatives,
/// and the d(d+1)/2 upper-triangular second derivatives.
std::size_t jet_width(std::size_t in_dim, int order);

/// Forward record of one jet propagation through an MLP. Keeps the layer
/// inputs and activation derivatives needed to pull an adjoint on the output
/// jets back to the parameters.
///
/// Internal layout: each layer's jets are a (units x batch*K) matrix whose
/// column b*K + k holds jet component k of point b.
class JetTape {
 public:
  JetTape(const MlpParams& params, const InputNormalizer& normalizer, const Tensor& x, int order);
  /// Raw network: inputs are fed unchanged and not range-checked.
  JetTape(const MlpParams& params, const Tensor& x, int order);

  const JetBatch& jets() const { return jets_; }
  const MlpParams& params() const { return params_; }

  /// Adds d(loss)/d(theta) to `grad` (flat layout), given d(loss)/d(jets).
  /// The Hessian adjoint may be non-symmetric; both (i,j) and (j,i) count.
  void backward(const JetBatch& adjoint, Eigen::VectorXd& grad) const;

 private:
  void run(const InputNormalizer* normalizer, const Tensor& x);

  MlpParams params_;
  std::size_t in_dim_;
  std::size_t batch_;
  int order_;
  std::size_t k_;
  std::vector<Eigen::MatrixXd> layer_inputs_;  // A_{l-1}, units x batch*K
  std::vector<Eigen::MatrixXd> preacts_;       // Z_l, units x batch*K
  // sigma', sigma'', sigma''' at the value column, units x batch.
  std::vector<Eigen::MatrixXd> d1_, d2_, d3_;
  JetBatch jets_;
};

/// Jets with respect to physical inputs (normalizer chain rule included).
JetBatch propagate_jets(const MlpParams& params, const InputNormalizer& normalizer,
                        const Tensor& inputs, int order);

/// Jets with the identity normalizer (inputs used as-is, no domain check).
JetBatch propagate_jets(const MlpParams& params, const Tensor& inputs, int order);

}  // namespace kpinn
