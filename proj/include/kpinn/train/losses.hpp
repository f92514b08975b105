#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "kpinn/autodiff/grad_tape.hpp"
#include "kpinn/core/tensor.hpp"
#include "kpinn/network/mlp.hpp"
#include "kpinn/operators/pde_operator.hpp"
#include "kpinn/quadrature/quadrature.hpp"

namespace kpinn {

/// Loss value with optional flat parameter gradient.
struct LossValue {
  double value = 0.0;
  Eigen::VectorXd gradient;
  std::size_t clamp_events = 0;
};

/// Boundary points with per-point target values (N_BC x targets). The targets
/// constrain the first `targets.cols()` network outputs.
struct BoundarySet {
  Tensor points;
  Eigen::MatrixXd targets;
  std::size_t size() const { return points.rank() == 2 ? points.dim(0) : 0; }
};

/// Lid-driven cavity: n/4 cell-centred points per edge of [0,1]^2, target
/// (lid_u, lid_v) on y = 1 and (0, 0) elsewhere.
BoundarySet cavity_boundary(std::size_t n, double lid_u = 1.0, double lid_v = 0.0);

/// Monge-Ampere: n/4 points per spatial edge of [0,1]^2, times spread over
/// [0,1] by a golden-ratio sequence, scalar target `value`.
BoundarySet pma_boundary(std::size_t n, double value = 0.0);

/// (1/N) sum_n sum_c (V(n,c) - targets(n,c))^2; targets may be empty (zero).
double projected_loss(const Eigen::MatrixXd& weak, const Eigen::MatrixXd& targets = {});

/// (1/N) sum_n sum_c r(n,c)^2.
double pinn_loss_from_residual(const Eigen::MatrixXd& residual);

/// VPINN loss with the residual already including -f, so the target
/// projection is zero. test_mat is N x grid nodes.
LossValue vpinn_loss(const MlpParams& params, const InputNormalizer& normalizer, const PdeOperator& op,
                     const Eigen::MatrixXd& test_mat, const QuadratureGrid& grid, bool with_gradient);

LossValue pinn_loss(const MlpParams& params, const InputNormalizer& normalizer, const PdeOperator& op,
                    const Tensor& collocation, bool with_gradient);

LossValue bc_loss(const MlpParams& params, const InputNormalizer& normalizer, const BoundarySet& bc,
                  bool with_gradient);

/// p(0.5, 0.5)^2 where p is output 2 of a Navier-Stokes network.
LossValue pressure_pin_loss(const MlpParams& params, const InputNormalizer& normalizer, bool with_gradient);

// Tape-based building blocks used by the trainer: each records its jets on
// `tape`, seeds the adjoint scaled by `weight` and returns the unweighted value.

struct WeakResidualTerm {
  double loss = 0.0;
  Eigen::MatrixXd nodal;  // grid residual (nodes x channels), reused for test loss
  std::size_t clamp_events = 0;
};

WeakResidualTerm record_vpinn(GradTape& tape, const InputNormalizer& normalizer, const PdeOperator& op,
                              const Eigen::MatrixXd& test_mat, const QuadratureGrid& grid, double weight);
double record_pinn(GradTape& tape, const InputNormalizer& normalizer, const PdeOperator& op,
                   const Tensor& collocation, double weight, std::size_t* clamp_events = nullptr);
double record_bc(GradTape& tape, const InputNormalizer& normalizer, const BoundarySet& bc, double weight);
double record_pressure_pin(GradTape& tape, const InputNormalizer& normalizer, double weight);

}  // namespace kpinn
