#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace kpinn {

struct TaylorRemainder {
  double epsilon = 0.0;
  /// Offset z - center at which the maximum was attained.
  double argmax = 0.0;
};

/// sup over sampled z in [center - R, center + R] of
///   |g(z) - sum_{i<=r} g^(i)(center) (z - center)^i / i!| / |z - center|^r.
/// `derivs` holds g^(0..r)(center). The center itself is skipped.
TaylorRemainder estimate_taylor_remainder(const std::function<double(double)>& g,
                                          std::span<const double> derivs, double center,
                                          double radius, std::size_t samples);

/// Convenience overload expanding about 0.
TaylorRemainder estimate_taylor_remainder(const std::function<double(double)>& g,
                                          std::span<const double> derivs, double radius,
                                          std::size_t samples);

/// log^(i)(z0) for i = 0..r.
std::vector<double> log_derivatives(double z0, int r);

/// Taylor coefficients g^(i)(z0)/i! of log about z0, i = 0..r.
std::vector<double> log_taylor_coefficients(double z0, int r);

}  // namespace kpinn
