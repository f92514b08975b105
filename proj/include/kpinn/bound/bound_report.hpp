#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kpinn/bound/koopman.hpp"
#include "kpinn/network/mlp.hpp"
#include "kpinn/operators/pde_operator.hpp"

namespace kpinn {

struct LayerBoundFactors {
  std::size_t layer = 0;
  Activation activation = Activation::Tanh;
  LayerBox box;
  double log_a = 0.0;
  double a = 1.0;        // may be +inf when log_a is huge
  double a_tilde = 0.5;
  double geo_mean = 1.0;  // D_l
  Eigen::VectorXd singular_values;
  /// log of |det W^T W|^{1/4} := sum_k (1/2) log(s_k + 1e-8) over positive s_k.
  double log_det_quarter = 0.0;
};

struct BoundInputs {
  double F = 0.0;
  int r = 1;
  double epsilon = 0.0;
  BoundTheorem theorem = BoundTheorem::Linear;
  std::size_t N = 1;
  /// ||g o v|| prod ||K|| / prod |det|^{1/4}; only used by the poly theorem.
  double g_term = 0.0;
  double expansion_point = 0.0;
};

/// Per-layer factors and the assembled bound. The alpha(f_l) factors are
/// taken as 1 and ||K_sigma_l|| as A_l^{1/2}.
struct BoundReport {
  std::vector<LayerBoundFactors> layers;
  double F = 0.0;
  int r = 1;
  double epsilon = 0.0;
  double expansion_point = 0.0;
  BoundTheorem theorem = BoundTheorem::Linear;
  std::size_t N = 1;
  double g_term = 0.0;
  /// ||v||: volume-normalized L2 norm of the last affine map over its input box,
  /// with every row norm replaced by the spectral norm of W_L.
  double v_norm = 0.0;
  double log_norm_proxy = 0.0;
  double norm_proxy = 0.0;  // U
  /// max_l |det W_l^T W_l|^{-1/4}: the smallest D with theta in Theta_D.
  double theta_constant = 0.0;
  double regularizer = 0.0;
  double assembled_bound = 0.0;  // +inf when it overflows; see log_assembled_bound
  double log_assembled_bound = 0.0;
  std::vector<std::string> notes;
};

/// Layer factors only (no F / theorem data).
std::vector<LayerBoundFactors> layer_factors(const MlpParams& params);

/// Volume-normalized L2 norm of x -> W_L x + b_L over [-m, m]^{d_{L-1}}.
double final_map_norm(const MlpParams& params, const std::vector<LayerBox>& boxes);

/// sqrt(sum_{i<=r} U^{2i} + U^{2r} [+ g^2]) scaled by F / sqrt(N); the linear
/// theorem gives (F / sqrt(N)) U.
double assemble_from_proxy(BoundTheorem theorem, double F, std::size_t N, double U, int r,
                           double g_term = 0.0);

/// Natural log of assemble_from_proxy, evaluated from log U so that huge
/// proxies do not overflow.
double log_assemble_from_proxy(BoundTheorem theorem, double F, std::size_t N, double log_u, int r,
                               double g_term = 0.0);

/// Throws ConfigError when the theorem does not match the operator.
void check_theorem(const PdeOperator& op, BoundTheorem theorem);

BoundReport assemble_bound(const MlpParams& params, const BoundInputs& inputs);

std::string bound_report_json(const BoundReport& report);
/// Human-readable per-layer table.
std::string bound_report_table(const BoundReport& report);

}  // namespace kpinn
