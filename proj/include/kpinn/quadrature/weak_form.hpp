#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "kpinn/network/mlp.hpp"
#include "kpinn/operators/pde_operator.hpp"
#include "kpinn/quadrature/quadrature.hpp"

namespace kpinn {

/// V_theta(x_n) per residual channel: quadrature of D(u)(y) p(y) over the grid.
Eigen::VectorXd weak_residual(const MlpParams& params, const InputNormalizer& normalizer,
                              const PdeOperator& op, const TestFunction& tf,
                              const QuadratureGrid& grid);

/// Weak residuals for many test functions from one forward pass:
/// (N x channels) = test_matrix * nodal residuals.
Eigen::MatrixXd weak_residuals(const MlpParams& params, const InputNormalizer& normalizer,
                               const PdeOperator& op, const Eigen::MatrixXd& test_mat,
                               const QuadratureGrid& grid);

/// |integral of g p_{x,c} - g(x)| for each c, with grids[k] used for cs[k].
/// Entries whose support leaves the box are still reported; throws DomainError
/// when the support escapes the box for every c.
std::vector<double> delta_limit_check(const std::function<double(std::span<const double>)>& g,
                                      std::span<const double> x, std::span<const double> cs,
                                      const std::vector<QuadratureGrid>& grids);

/// Same, one grid for all c.
std::vector<double> delta_limit_check(const std::function<double(std::span<const double>)>& g,
                                      std::span<const double> x, std::span<const double> cs,
                                      const QuadratureGrid& grid);

}  // namespace kpinn
