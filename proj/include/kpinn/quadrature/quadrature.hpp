#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "kpinn/core/tensor.hpp"
#include "kpinn/network/mlp.hpp"

namespace kpinn {

/// Axis-aligned box [lo_1, hi_1] x ... x [lo_d, hi_d].
struct DomainBox {
  std::vector<double> lo;
  std::vector<double> hi;

  static DomainBox unit(std::size_t dim);
  std::size_t dim() const { return lo.size(); }
  double volume() const;
  bool contains(std::span<const double> x, double tol = 1e-12) const;
  InputNormalizer normalizer() const;
};

/// Midpoint rule: nodes at cell centres, uniform weight equal to the cell volume.
/// Nodes are enumerated with the last coordinate varying fastest.
class QuadratureGrid {
 public:
  QuadratureGrid(DomainBox box, std::vector<std::size_t> nodes_per_dim);
  static QuadratureGrid uniform(const DomainBox& box, std::size_t nodes_per_dim);

  const DomainBox& box() const { return box_; }
  const std::vector<std::size_t>& nodes_per_dim() const { return counts_; }
  std::size_t size() const { return nodes_.dim(0); }
  double weight() const { return weight_; }
  const Tensor& nodes() const { return nodes_; }
  std::span<const double> node(std::size_t i) const { return nodes_.row(i); }

 private:
  DomainBox box_;
  std::vector<std::size_t> counts_;
  double weight_ = 0.0;
  Tensor nodes_;
};

/// Collocation points x_1..x_N inside the domain.
struct CollocationSet {
  Tensor points;  // (N, d)
  std::uint64_t seed = 0;

  std::size_t size() const { return points.rank() == 2 ? points.dim(0) : 0; }
};

/// Uniform i.i.d. points in the box.
CollocationSet draw_collocation(const DomainBox& box, std::size_t n, std::uint64_t seed);
/// Uniform points in the box shrunk by `margin` on every side.
CollocationSet draw_collocation(const DomainBox& box, std::size_t n, double margin,
                                std::uint64_t seed);

/// Unnormalized radial bump q(v) = exp(-1 / (1 - c^2 |v|^2)) for c|v| < 1, else 0,
/// or one of its partial derivatives (multi-index of total order <= 2).
double bump_raw(std::span<const double> v, double c, std::span<const int> deriv = {});

/// p(y) = q(y - center) / Z with Z = integral of q(. - center) over the domain,
/// computed on a quadrature grid, so p integrates to one on that grid even when
/// the support ball extends past the domain.
class TestFunction {
 public:
  TestFunction(std::vector<double> center, double concentration, double norm_constant);
  static TestFunction normalized(std::vector<double> center, double concentration,
                                 const QuadratureGrid& grid);

  const std::vector<double>& center() const { return center_; }
  double concentration() const { return c_; }
  double norm_constant() const { return norm_; }
  double support_radius() const { return 1.0 / c_; }
  std::size_t dim() const { return center_.size(); }

  /// True when the closed support ball lies strictly inside the box.
  bool support_inside(const DomainBox& box) const;

  double value(std::span<const double> y) const;
  double derivative(std::span<const double> y, std::span<const int> deriv) const;

 private:
  std::vector<double> center_;
  double c_;
  double norm_;
};

/// p (deriv empty or all zero) or a partial derivative of p at y.
double bump_eval(const TestFunction& tf, std::span<const double> y, std::span<const int> deriv);

/// Midpoint-rule integral; throws NumericError on a non-finite integrand value.
double integrate(const std::function<double(std::span<const double>)>& f,
                 const QuadratureGrid& grid);

/// One normalized test function per collocation point.
std::vector<TestFunction> make_test_functions(const CollocationSet& centers, double concentration,
                                              const QuadratureGrid& grid);

/// Quadrature matrix M (N x nodes) with M(n, g) = p_n(y_g) * weight, so
/// M * r gives the weak residuals of nodal values r.
Eigen::MatrixXd test_matrix(const std::vector<TestFunction>& tfs, const QuadratureGrid& grid);

}  // namespace kpinn
