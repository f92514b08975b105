#include "kpinn/quadrature/weak_form.hpp"

#include <cmath>

#include "kpinn/core/error.hpp"

namespace kpinn {

Eigen::VectorXd weak_residual(const MlpParams& params, const InputNormalizer& normalizer,
                              const PdeOperator& op, const TestFunction& tf,
                              const QuadratureGrid& grid) {
  const Eigen::MatrixXd m = test_matrix({tf}, grid);
  return weak_residuals(params, normalizer, op, m, grid).row(0).transpose();
}

Eigen::MatrixXd weak_residuals(const MlpParams& params, const InputNormalizer& normalizer,
                               const PdeOperator& op, const Eigen::MatrixXd& test_mat,
                               const QuadratureGrid& grid) {
  if (test_mat.cols() != static_cast<Eigen::Index>(grid.size())) {
    throw ShapeError("test matrix does not match the grid");
  }
  const ResidualBatch r = network_residual(op, params, normalizer, grid.nodes());
  return test_mat * r.values;
}

std::vector<double> delta_limit_check(const std::function<double(std::span<const double>)>& g,
                                      std::span<const double> x, std::span<const double> cs,
                                      const std::vector<QuadratureGrid>& grids) {
  if (grids.size() != cs.size()) throw ShapeError("one grid per concentration expected");
  if (cs.empty()) throw DomainError("empty concentration sequence");
  const std::vector<double> center(x.begin(), x.end());
  const double gx = g(x);
  std::vector<double> errors;
  bool any_inside = false;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    const TestFunction tf = TestFunction::normalized(center, cs[k], grids[k]);
    any_inside = any_inside || tf.support_inside(grids[k].box());
    const double v = integrate([&](std::span<const double> y) { return g(y) * tf.value(y); }, grids[k]);
    errors.push_back(std::abs(v - gx));
  }
  if (!any_inside) throw DomainError("test-function support leaves the domain for every c");
  return errors;
}

std::vector<double> delta_limit_check(const std::function<double(std::span<const double>)>& g,
                                      std::span<const double> x, std::span<const double> cs,
                                      const QuadratureGrid& grid) {
  return delta_limit_check(g, x, cs, std::vector<QuadratureGrid>(cs.size(), grid));
}

}  // namespace kpinn
