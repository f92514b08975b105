#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "kpinn/network/mlp.hpp"

namespace kpinn {

/// Offset added to singular values before taking logs.
inline constexpr double kSingularOffset = 1e-8;
/// Singular values at or below this count as zero (numerical rank).
inline constexpr double kRankTolerance = 1e-10;
/// Weight of each layer's term in the regularizer.
inline constexpr double kRegularizerWeight = 0.01;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double half_width() const { return 0.5 * (hi - lo); }
  double magnitude() const;  // max(|lo|, |hi|)
};

/// Pre-activation box of one layer: [-a, a]^{d_l} with
/// a = ||W_l||_2 * m_{l-1} + ||b_l||_inf.
struct LayerBox {
  std::vector<Interval> intervals;
  double half_width = 0.0;
  double spectral_norm = 0.0;
  double bias_inf = 0.0;
  /// Bound on |input| coordinates of this layer (1 after tanh/sigmoid).
  double input_bound = 1.0;
  bool degenerate = false;  // zero weight matrix
};

struct SpectralNorm {
  double value = 0.0;
  Eigen::VectorXd u;  // left singular vector
  Eigen::VectorXd v;  // right singular vector
  int iterations = 0;
  bool converged = false;
};

/// Largest singular value and vectors from a full SVD.
SpectralNorm spectral_norm(const Eigen::MatrixXd& w);

/// Power iteration on W^T W from a fixed start vector.
SpectralNorm spectral_norm_power(const Eigen::MatrixXd& w, int max_iters = 50, double tol = 1e-10);

/// Boxes for every layer, starting from the normalized input box [-1, 1]^{d_0}.
std::vector<LayerBox> propagate_boxes(const MlpParams& params);

/// log A_l for an activation over a product of intervals:
///   tanh:    sum_i log sup_{x in tanh(I_i)} 1/(1 - x^2) = sum_i 2 log cosh(m_i)
///   sigmoid: sum_i log sup_{x in s(I_i)} 1/(x - x^2)   = sum_i log(2 + 2 cosh m_i)
///   none:    0
/// with m_i = max |I_i|. Computed in log space.
double log_koopman_factor(Activation act, const std::vector<Interval>& box);
/// Symmetric box [-a, a]^d.
double log_koopman_factor(Activation act, double a, std::size_t d);
/// exp of the above (may overflow to +inf for huge boxes).
double koopman_factor(Activation act, const std::vector<Interval>& box);

/// 1 / (1 + 1/A); throws DomainError for A <= 0.
double a_tilde(double a);
/// 1 / (1 + exp(-log A)), stable for any log A.
double a_tilde_from_log(double log_a);

struct SingularSummary {
  double geo_mean = 0.0;              // D_l
  Eigen::VectorXd singular_values;    // descending
  std::size_t rank = 0;
  /// sum over positive singular values of log(s_k + offset).
  double log_sum = 0.0;
};

/// D_l = exp((1/R) sum_k log(s_k + 1e-8)) over the R singular values > 1e-10.
SingularSummary geo_mean_singular(const Eigen::MatrixXd& w);

struct RegularizerTerm {
  double log_a = 0.0;
  double a_tilde = 0.0;
  double geo_mean = 0.0;
  double value = 0.0;  // 0.01 * a_tilde / sqrt(geo_mean)
};

struct RegularizerValue {
  double value = 0.0;
  std::vector<RegularizerTerm> terms;
  Eigen::VectorXd gradient;  // flat layout; empty unless requested
};

/// 0.01 * sum_l A~_l / D_l^{1/2} over all weight layers. Layers with no
/// activation contribute A = 1, so A~ = 1/2.
RegularizerValue regularizer(const MlpParams& params, bool with_gradient = false);

}  // namespace kpinn
