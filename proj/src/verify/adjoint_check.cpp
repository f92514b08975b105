#include "kpinn/verify/adjoint_check.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kpinn/core/error.hpp"
#include "kpinn/core/rng.hpp"

namespace kpinn {

double SmoothField::value(std::span<const double> y) const {
  double s = constant;
  for (std::size_t i = 0; i < linear.size(); ++i) s += linear[i] * y[i];
  for (std::size_t k = 0; k < amps.size(); ++k) {
    double arg = phases[k];
    for (std::size_t i = 0; i < freqs[k].size(); ++i) arg += freqs[k][i] * y[i];
    s += amps[k] * std::sin(arg);
  }
  return s;
}

double SmoothField::derivative(std::span<const double> y, std::size_t axis) const {
  double s = axis < linear.size() ? linear[axis] : 0.0;
  for (std::size_t k = 0; k < amps.size(); ++k) {
    double arg = phases[k];
    for (std::size_t i = 0; i < freqs[k].size(); ++i) arg += freqs[k][i] * y[i];
    s += amps[k] * freqs[k][axis] * std::cos(arg);
  }
  return s;
}

SmoothField SmoothField::random(std::size_t dim, std::size_t modes, std::uint64_t seed) {
  Rng rng(seed);
  SmoothField f;
  f.constant = rng.uniform(-1.0, 1.0);
  for (std::size_t i = 0; i < dim; ++i) f.linear.push_back(rng.uniform(-1.0, 1.0));
  for (std::size_t k = 0; k < modes; ++k) {
    std::vector<double> w;
    for (std::size_t i = 0; i < dim; ++i) w.push_back(rng.uniform(-4.0, 4.0));
    f.freqs.push_back(std::move(w));
    f.amps.push_back(rng.uniform(-1.0, 1.0));
    f.phases.push_back(rng.uniform(0.0, 2.0 * std::numbers::pi));
  }
  return f;
}

SmoothField SmoothField::affine(std::vector<double> linear, double constant) {
  SmoothField f;
  f.linear = std::move(linear);
  f.constant = constant;
  return f;
}

AdjointCheckResult adjoint_identity_check(const TestFunction& tf, const std::vector<SmoothField>& fields,
                                          const QuadratureGrid& grid) {
  const std::size_t d = grid.box().dim();
  if (tf.dim() != d) throw ShapeError("test function and grid dimensions differ");
  if (!tf.support_inside(grid.box())) {
    throw DomainError("test-function support touches the boundary; integration by parts would leave boundary terms");
  }
  if (fields.empty()) throw DomainError("no fields to check");
  const std::size_t n = grid.size();
  const double w = grid.weight();
  std::vector<double> p(n);
  std::vector<std::vector<double>> dp(d, std::vector<double>(n));
  std::vector<int> idx(d, 0);
  for (std::size_t g = 0; g < n; ++g) {
    const auto y = grid.node(g);
    p[g] = tf.value(y);
    for (std::size_t i = 0; i < d; ++i) {
      std::fill(idx.begin(), idx.end(), 0);
      idx[i] = 1;
      dp[i][g] = tf.derivative(y, idx);
    }
  }
  AdjointCheckResult out;
  for (const auto& f : fields) {
    for (std::size_t i = 0; i < d; ++i) {
      double lhs = 0.0, rhs = 0.0, pp = 0.0, uu = 0.0, dpdp = 0.0, dudu = 0.0;
      for (std::size_t g = 0; g < n; ++g) {
        const auto y = grid.node(g);
        const double u = f.value(y);
        const double du = f.derivative(y, i);
        lhs += p[g] * du;
        rhs -= dp[i][g] * u;
        pp += p[g] * p[g];
        uu += u * u;
        dpdp += dp[i][g] * dp[i][g];
        dudu += du * du;
      }
      const double scale = w * (std::sqrt(pp * dudu) + std::sqrt(dpdp * uu)) + 1e-300;
      const double disc = std::abs(w * (lhs - rhs)) / scale;
      out.discrepancies.push_back(disc);
      out.max_discrepancy = std::max(out.max_discrepancy, disc);
    }
  }
  return out;
}

AdjointCheckResult adjoint_identity_check(const TestFunction& tf, const QuadratureGrid& grid,
                                          std::size_t count, std::uint64_t seed) {
  std::vector<SmoothField> fields;
  for (std::size_t k = 0; k < count; ++k) {
    fields.push_back(SmoothField::random(grid.box().dim(), 3, derive_seed(seed, "field-" + std::to_string(k))));
  }
  return adjoint_identity_check(tf, fields, grid);
}

double cauchy_schwarz_slack(const TestFunction& tf, const std::vector<SmoothField>& fields,
                            const QuadratureGrid& grid) {
  const std::size_t d = grid.box().dim();
  std::vector<int> idx(d, 0);
  double worst = -1.0;
  for (const auto& f : fields) {
    for (std::size_t i = 0; i < d; ++i) {
      std::fill(idx.begin(), idx.end(), 0);
      idx[i] = 1;
      double ab = 0.0, aa = 0.0, bb = 0.0;
      for (std::size_t g = 0; g < grid.size(); ++g) {
        const auto y = grid.node(g);
        const double a = tf.derivative(y, idx);
        const double b = f.value(y);
        ab += a * b;
        aa += a * a;
        bb += b * b;
      }
      const double denom = std::sqrt(aa * bb);
      if (denom > 0.0) worst = std::max(worst, (std::abs(ab) - denom) / denom);
    }
  }
  return worst;
}

}  // namespace kpinn
