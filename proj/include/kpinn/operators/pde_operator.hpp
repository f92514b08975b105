#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kpinn/autodiff/jets.hpp"
#include "kpinn/network/mlp.hpp"

namespace kpinn {

enum class OperatorKind {
  NavierStokes2D,        // outputs (u1, u2, p) on (x, y)
  ParabolicMongeAmpere,  // output u on (x, y, t)
  DerivativeSum,         // scalar u, residual sum_i du/dx_i (linear test operator)
};

/// Which assembled bound applies to an operator.
enum class BoundTheorem { Linear, Polynomial, NonlinearOfLinear };

std::string to_string(OperatorKind k);
std::string to_string(BoundTheorem t);
BoundTheorem parse_theorem(const std::string& s);

/// f(x, y) = constant + x_coeff * x; defaults to 1 + log 2 + 2x.
struct PmaSource {
  double constant = 1.0 + std::numbers::ln2;
  double x_coeff = 2.0;
  double operator()(double x, double /*y*/) const { return constant + x_coeff * x; }
};

/// Residual descriptor. `nonlinearity_order` is the Taylor order r and
/// `remainder_bound` the remainder constant epsilon used by the bounds.
struct PdeOperator {
  OperatorKind kind = OperatorKind::NavierStokes2D;
  double reynolds = 100.0;
  PmaSource source;
  int nonlinearity_order = 2;
  double remainder_bound = 0.0;
  /// Expansion point z0 of log z for the Monge-Ampere bound.
  double expansion_point = 1.0;
  /// log det D^2u is evaluated as log(det_floor) when det <= det_floor.
  double det_floor = 1e-8;
  std::size_t dim = 2;

  static PdeOperator navier_stokes(double reynolds = 100.0);
  static PdeOperator monge_ampere(const PmaSource& source = {}, int order = 1,
                                  double expansion_point = 1.0);
  static PdeOperator derivative_sum(std::size_t dim = 2);

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  /// Number of scalar residual channels.
  std::size_t channels() const;
  /// Jet order the residual needs.
  int jet_order() const;
  BoundTheorem theorem() const;

  void validate() const;
};

/// Nodal residual values, (batch x channels), with Monge-Ampere clamp flags.
struct ResidualBatch {
  Eigen::MatrixXd values;
  std::vector<char> clamped;
  std::size_t clamp_events = 0;
};

/// Strong-form residual D(u)(x) - f(x) from the jets at `points`.
ResidualBatch evaluate_residual(const PdeOperator& op, const JetBatch& jets, const Tensor& points);

/// Adjoint on the jets given d(loss)/d(residual values) (batch x channels).
JetBatch residual_pullback(const PdeOperator& op, const JetBatch& jets, const ResidualBatch& res,
                           const Eigen::MatrixXd& adjoint);

/// One forward pass plus residual evaluation.
ResidualBatch network_residual(const PdeOperator& op, const MlpParams& params,
                               const InputNormalizer& normalizer, const Tensor& points);

struct NsResidual {
  std::array<double, 2> momentum{};
  double divergence = 0.0;
};

/// (u.grad)u + grad p - (1/Re) lap u and div u at one point.
NsResidual ns_residual(const MlpParams& params, const InputNormalizer& normalizer,
                       std::span<const double> x, double reynolds);

struct PmaResidual {
  double value = 0.0;
  bool clamped = false;
};

/// -u_t + log det D^2_x u - f(x, y) at (x, y, t).
PmaResidual pma_residual(const MlpParams& params, const InputNormalizer& normalizer,
                         std::span<const double> xt, const PmaSource& source,
                         double det_floor = 1e-8);

}  // namespace kpinn
