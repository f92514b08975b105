#pragma once

#include <cstddef>
#include <cstdint>

#include "kpinn/network/mlp.hpp"

namespace kpinn {

struct KoopmanAuditResult {
  double a = 0.0;
  /// max over sampled h of ||h o sigma||_{L2[-a,a]} / ||h||_{L2(sigma([-a,a]))}.
  double empirical_norm = 0.0;
  /// sqrt(A) with A the closed-form factor (cosh(a) for tanh).
  double bound = 0.0;
  double margin = 0.0;  // bound - empirical_norm
  /// Dense-grid sup of 1/(sigma'(sigma^{-1}(x))) over the image and its closed form A.
  double grid_sup = 0.0;
  double closed_form = 0.0;
  std::size_t samples = 0;
};

/// 1-D audit of ||K_sigma|| <= A^{1/2} with random trigonometric polynomials h
/// (up to 8 modes), integrals by midpoint quadrature with `nodes` cells.
KoopmanAuditResult koopman_audit(Activation act, double a, std::size_t samples, std::uint64_t seed,
                                 std::size_t nodes = 20000);

/// sup over a uniform grid of `points` points on [-a, a] (endpoints included)
/// of 1/sigma'(x), which equals sup over sigma([-a,a]) of the inverse-Jacobian.
double dense_inverse_jacobian_sup(Activation act, double a, std::size_t points = 100000);

}  // namespace kpinn
