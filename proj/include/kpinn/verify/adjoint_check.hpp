#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "kpinn/quadrature/quadrature.hpp"

namespace kpinn {

/// u(y) = a_0 + b . y + sum_k c_k sin(w_k . y + phi_k), with exact gradient.
struct SmoothField {
  double constant = 0.0;
  std::vector<double> linear;
  std::vector<std::vector<double>> freqs;
  std::vector<double> amps;
  std::vector<double> phases;

  double value(std::span<const double> y) const;
  double derivative(std::span<const double> y, std::size_t axis) const;

  static SmoothField random(std::size_t dim, std::size_t modes, std::uint64_t seed);
  static SmoothField affine(std::vector<double> linear, double constant);
};

struct AdjointCheckResult {
  double max_discrepancy = 0.0;
  std::vector<double> discrepancies;  // one per (field, axis)
};

/// |<p, d_i u> + <d_i p, u>| / (||p|| ||d_i u|| + ||d_i p|| ||u|| + 1e-300) by
/// quadrature, over every field and axis. Throws DomainError when the support
/// of p is not strictly inside the grid box.
AdjointCheckResult adjoint_identity_check(const TestFunction& tf, const std::vector<SmoothField>& fields,
                                          const QuadratureGrid& grid);

/// `count` random fields (count >= 20 is the audit default).
AdjointCheckResult adjoint_identity_check(const TestFunction& tf, const QuadratureGrid& grid,
                                          std::size_t count, std::uint64_t seed);

/// Largest relative Cauchy-Schwarz violation (|<a,b>| - ||a|| ||b||) / (||a|| ||b||)
/// over the inner products used by the check; <= 0 up to roundoff.
double cauchy_schwarz_slack(const TestFunction& tf, const std::vector<SmoothField>& fields,
                            const QuadratureGrid& grid);

}  // namespace kpinn
