#include "kpinn/operators/adjoint_terms.hpp"

#include <algorithm>
#include <cmath>

#include "kpinn/core/error.hpp"
#include "kpinn/operators/taylor.hpp"

namespace kpinn {

namespace {

// Value, gradient and Hessian of p at every grid node.
struct NodalBump {
  std::vector<double> value;
  std::vector<std::vector<double>> grad;                 // [i][node]
  std::vector<std::vector<std::vector<double>>> hess;    // [i][j][node]
};

NodalBump tabulate(const TestFunction& tf, const QuadratureGrid& grid, bool second) {
  const std::size_t d = grid.box().dim();
  if (tf.dim() != d) throw ShapeError("test function and grid dimensions differ");
  const std::size_t n = grid.size();
  NodalBump out;
  out.value.resize(n);
  out.grad.assign(d, std::vector<double>(n));
  if (second) out.hess.assign(d, std::vector<std::vector<double>>(d, std::vector<double>(n)));
  std::vector<int> idx(d, 0);
  for (std::size_t g = 0; g < n; ++g) {
    const auto y = grid.node(g);
    out.value[g] = tf.value(y);
    if (out.value[g] == 0.0) continue;  // all derivatives vanish off the support
    for (std::size_t i = 0; i < d; ++i) {
      std::fill(idx.begin(), idx.end(), 0);
      idx[i] = 1;
      out.grad[i][g] = tf.derivative(y, idx);
      if (!second) continue;
      for (std::size_t j = i; j < d; ++j) {
        std::fill(idx.begin(), idx.end(), 0);
        idx[i] += 1;
        idx[j] += 1;
        const double h = tf.derivative(y, idx);
        out.hess[i][j][g] = h;
        out.hess[j][i][g] = h;
      }
    }
  }
  return out;
}

double sq_norm(const std::vector<double>& f, double w) {
  double s = 0.0;
  for (double v : f) s += v * v;
  return s * w;
}

}  // namespace

double convection_adjoint_norm(const TestFunction& tf, const QuadratureGrid& grid) {
  const NodalBump nb = tabulate(tf, grid, false);
  const std::size_t d = grid.box().dim();
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) s += sq_norm(nb.grad[i], grid.weight());
  // d identical components p_j = p.
  return static_cast<double>(d) * s;
}

AdjointBundle adjoint_bundle(const PdeOperator& op, const TestFunction& tf, const QuadratureGrid& grid) {
  op.validate();
  if (grid.box().dim() != op.input_dim()) throw ShapeError("grid dimension does not match operator");
  const bool second = op.kind != OperatorKind::DerivativeSum;
  const NodalBump nb = tabulate(tf, grid, second);
  const std::size_t d = grid.box().dim();
  const std::size_t n = grid.size();
  const double w = grid.weight();
  const double eps = op.remainder_bound;

  AdjointBundle b;
  b.p_norm_sq = sq_norm(nb.value, w);
  for (std::size_t i = 0; i < d; ++i) b.grad_norm_sq += sq_norm(nb.grad[i], w);
  b.grad_norm_sq *= static_cast<double>(d);

  switch (op.kind) {
    case OperatorKind::NavierStokes2D: {
      const double inv_re = 1.0 / op.reynolds;
      std::vector<double> a(n), c(n), div(n);
      for (std::size_t g = 0; g < n; ++g) {
        const double lap = nb.hess[0][0][g] + nb.hess[1][1][g];
        a[g] = lap * inv_re + nb.grad[0][g];
        c[g] = lap * inv_re + nb.grad[1][g];
        div[g] = nb.grad[0][g] + nb.grad[1][g];
      }
      b.terms = {0.0, sq_norm(a, w) + sq_norm(c, w) + sq_norm(div, w),
                 convection_adjoint_norm(tf, grid)};
      b.total = b.terms[0] + b.terms[1] + b.terms[2] + (eps * eps + 1.0) * 3.0 * b.p_norm_sq;
      break;
    }
    case OperatorKind::ParabolicMongeAmpere: {
      const auto coeff = log_taylor_coefficients(op.expansion_point, op.nonlinearity_order);
      double s = sq_norm(nb.grad[2], w);
      for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) s += sq_norm(nb.hess[i][j], w);
      }
      b.terms.resize(coeff.size());
      b.terms[0] = coeff[0] * coeff[0] * b.p_norm_sq;
      for (std::size_t i = 1; i < coeff.size(); ++i) b.terms[i] = coeff[i] * coeff[i] * s;
      b.total = (eps * eps + 1.0) * b.p_norm_sq;
      for (double t : b.terms) b.total += t;
      break;
    }
    case OperatorKind::DerivativeSum: {
      std::vector<double> s(n, 0.0);
      for (std::size_t g = 0; g < n; ++g) {
        for (std::size_t i = 0; i < d; ++i) s[g] += nb.grad[i][g];
      }
      b.terms = {0.0, sq_norm(s, w)};
      b.total = b.terms[1] + (eps * eps + 1.0) * b.p_norm_sq;
      break;
    }
  }
  if (!std::isfinite(b.total)) throw NumericError("non-finite adjoint norm");
  return b;
}

FEstimate estimate_F(const PdeOperator& op, const std::vector<TestFunction>& tfs,
                     const QuadratureGrid& grid) {
  if (tfs.empty()) throw DomainError("F needs at least one test function");
  FEstimate out;
  double best = 0.0;
  for (const auto& tf : tfs) {
    out.bundles.push_back(adjoint_bundle(op, tf, grid));
    best = std::max(best, out.bundles.back().total);
  }
  out.F = std::sqrt(best);
  return out;
}

}  // namespace kpinn
