#include "kpinn/operators/taylor.hpp"

#include <cmath>

#include "kpinn/core/error.hpp"

namespace kpinn {

TaylorRemainder estimate_taylor_remainder(const std::function<double(double)>& g,
                                          std::span<const double> derivs, double center,
                                          double radius, std::size_t samples) {
  if (samples < 100) throw DomainError("Taylor remainder needs at least 100 samples");
  if (derivs.empty()) throw DomainError("Taylor remainder needs derivatives up to order r >= 1");
  if (!(radius > 0.0)) throw DomainError("Taylor radius must be positive");
  const std::size_t r = derivs.size() - 1;
  TaylorRemainder out;
  for (std::size_t k = 0; k < samples; ++k) {
    const double h = radius * (-1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(samples - 1));
    if (h == 0.0) continue;
    const double gz = g(center + h);
    if (!std::isfinite(gz)) throw DomainError("function not evaluable on the Taylor interval");
    double poly = 0.0;
    double term = 1.0;
    for (std::size_t i = 0; i <= r; ++i) {
      poly += derivs[i] * term;
      term *= h / static_cast<double>(i + 1);
    }
    const double e = std::abs(gz - poly) / std::pow(std::abs(h), static_cast<double>(r));
    if (e > out.epsilon) {
      out.epsilon = e;
      out.argmax = h;
    }
  }
  return out;
}

TaylorRemainder estimate_taylor_remainder(const std::function<double(double)>& g,
                                          std::span<const double> derivs, double radius,
                                          std::size_t samples) {
  return estimate_taylor_remainder(g, derivs, 0.0, radius, samples);
}

std::vector<double> log_derivatives(double z0, int r) {
  if (!(z0 > 0.0)) throw DomainError("log expansion point must be positive");
  if (r < 0) throw DomainError("negative Taylor order");
  std::vector<double> d(static_cast<std::size_t>(r) + 1);
  d[0] = std::log(z0);
  // log^(i)(z) = (-1)^(i+1) (i-1)! / z^i
  double fact = 1.0;
  for (int i = 1; i <= r; ++i) {
    if (i > 1) fact *= i - 1;
    d[static_cast<std::size_t>(i)] = ((i % 2 == 1) ? 1.0 : -1.0) * fact / std::pow(z0, i);
  }
  return d;
}

std::vector<double> log_taylor_coefficients(double z0, int r) {
  std::vector<double> c = log_derivatives(z0, r);
  double fact = 1.0;
  for (std::size_t i = 1; i < c.size(); ++i) {
    fact *= static_cast<double>(i);
    c[i] /= fact;
  }
  return c;
}

}  // namespace kpinn
