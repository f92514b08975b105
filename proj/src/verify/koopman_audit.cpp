#include "kpinn/verify/koopman_audit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "kpinn/bound/koopman.hpp"
#include "kpinn/core/error.hpp"
#include "kpinn/core/rng.hpp"

namespace kpinn {

namespace {

double activate(Activation act, double x) {
  switch (act) {
    case Activation::Tanh:
      return std::tanh(x);
    case Activation::Sigmoid:
      return 1.0 / (1.0 + std::exp(-x));
    case Activation::None:
      break;
  }
  throw DomainError("Koopman audit needs tanh or sigmoid");
}

double slope(Activation act, double x) {
  const double s = activate(act, x);
  return act == Activation::Tanh ? 1.0 - s * s : s * (1.0 - s);
}

struct TrigPoly {
  double c0 = 0.0;
  std::vector<double> a, b, w;
  double operator()(double y) const {
    double s = c0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * std::cos(w[k] * y) + b[k] * std::sin(w[k] * y);
    return s;
  }
};

}  // namespace

double dense_inverse_jacobian_sup(Activation act, double a, std::size_t points) {
  if (!(a >= 0.0)) throw DomainError("box half-width must be nonnegative");
  if (points < 2) throw DomainError("need at least two grid points");
  double best = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double x = -a + 2.0 * a * static_cast<double>(i) / static_cast<double>(points - 1);
    best = std::max(best, 1.0 / slope(act, x));
  }
  return best;
}

KoopmanAuditResult koopman_audit(Activation act, double a, std::size_t samples, std::uint64_t seed,
                                 std::size_t nodes) {
  if (!(a > 0.0)) throw DomainError("box half-width must be positive");
  if (samples == 0 || nodes < 10) throw DomainError("audit needs samples and a quadrature grid");
  KoopmanAuditResult res;
  res.a = a;
  res.samples = samples;
  res.closed_form = std::exp(log_koopman_factor(act, a, 1));
  res.bound = std::sqrt(res.closed_form);
  res.grid_sup = dense_inverse_jacobian_sup(act, a);

  const double lo = activate(act, -a);
  const double hi = activate(act, a);
  const double hx = 2.0 * a / static_cast<double>(nodes);
  const double hy = (hi - lo) / static_cast<double>(nodes);
  std::vector<double> xs(nodes), sx(nodes), ys(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    xs[i] = -a + (static_cast<double>(i) + 0.5) * hx;
    sx[i] = activate(act, xs[i]);
    ys[i] = lo + (static_cast<double>(i) + 0.5) * hy;
  }
  Rng rng(seed);
  const double span = hi - lo;
  for (std::size_t s = 0; s < samples; ++s) {
    TrigPoly h;
    h.c0 = rng.uniform(-1.0, 1.0);
    const auto modes = 1 + static_cast<std::size_t>(rng.uniform() * 8.0);
    for (std::size_t k = 0; k < modes; ++k) {
      h.a.push_back(rng.uniform(-1.0, 1.0));
      h.b.push_back(rng.uniform(-1.0, 1.0));
      h.w.push_back(std::numbers::pi * static_cast<double>(k + 1) / span * rng.uniform(0.5, 4.0));
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
      const double u = h(sx[i]);
      const double v = h(ys[i]);
      num += u * u;
      den += v * v;
    }
    num *= hx;
    den *= hy;
    if (den <= 0.0) continue;
    res.empirical_norm = std::max(res.empirical_norm, std::sqrt(num / den));
  }
  res.margin = res.bound - res.empirical_norm;
  return res;
}

}  // namespace kpinn
