#pragma once

#include <vector>

#include "kpinn/operators/pde_operator.hpp"
#include "kpinn/quadrature/quadrature.hpp"

namespace kpinn {

/// Adjoint-lifted test-function norms for one test function.
///   terms[i] = ||(1/i!) D^(i)(0)^* p||^2 for i = 0..r
///   total    = sum_i terms[i] + (eps^2 + 1) * channels_with_mass * ||p||^2
struct AdjointBundle {
  double p_norm_sq = 0.0;
  double grad_norm_sq = 0.0;  // sum_{i,j} ||d_i p_j||^2 with p_j = p
  std::vector<double> terms;
  double total = 0.0;
};

struct FEstimate {
  double F = 0.0;
  std::vector<AdjointBundle> bundles;
};

/// Quadrature of sum_{i,j} (d_i p_j)^2 with every component p_j equal to the
/// scalar bump. The index range of i and j is the grid dimension.
double convection_adjoint_norm(const TestFunction& tf, const QuadratureGrid& grid);

/// Term table of one test function for the operator.
///
/// Navier-Stokes (channels m1, m2, div; r = 2):
///   0: 0 (the operator has no constant part)
///   1: ||lap p/Re + d1 p||^2 + ||lap p/Re + d2 p||^2 + ||d1 p + d2 p||^2
///   2: convection_adjoint_norm
///   tail: (eps^2 + 1) * 3 ||p||^2
/// Monge-Ampere, log z expanded about z0 with coefficients a_i = g^(i)(z0)/i!:
///   0: a_0^2 ||p||^2
///   i: a_i^2 (||p_t||^2 + sum_{i,j in {x,y}} ||p_ij||^2)
///   tail: (eps^2 + 1) ||p||^2
/// Derivative sum:
///   0: 0,  1: ||sum_i d_i p||^2,  tail: (eps^2 + 1) ||p||^2
AdjointBundle adjoint_bundle(const PdeOperator& op, const TestFunction& tf, const QuadratureGrid& grid);

/// F = max_n sqrt(total_n). Does not depend on network parameters.
FEstimate estimate_F(const PdeOperator& op, const std::vector<TestFunction>& tfs,
                     const QuadratureGrid& grid);

}  // namespace kpinn
