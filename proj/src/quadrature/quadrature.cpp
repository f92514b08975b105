#include "kpinn/quadrature/quadrature.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "kpinn/core/error.hpp"
#include "kpinn/core/rng.hpp"

namespace kpinn {

DomainBox DomainBox::unit(std::size_t dim) {
  return DomainBox{std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
}

double DomainBox::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < dim(); ++i) v *= hi[i] - lo[i];
  return v;
}

bool DomainBox::contains(std::span<const double> x, double tol) const {
  if (x.size() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (!(x[i] >= lo[i] - tol && x[i] <= hi[i] + tol)) return false;
  }
  return true;
}

InputNormalizer DomainBox::normalizer() const {
  const auto n = static_cast<Eigen::Index>(dim());
  return InputNormalizer(Eigen::Map<const Eigen::VectorXd>(lo.data(), n),
                         Eigen::Map<const Eigen::VectorXd>(hi.data(), n));
}

QuadratureGrid::QuadratureGrid(DomainBox box, std::vector<std::size_t> nodes_per_dim)
    : box_(std::move(box)), counts_(std::move(nodes_per_dim)) {
  const std::size_t d = box_.dim();
  if (d == 0 || counts_.size() != d) throw ShapeError("grid needs one node count per dimension");
  if (box_.hi.size() != d) throw ShapeError("domain box bounds mismatch");
  std::size_t total = 1;
  weight_ = 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    if (counts_[i] == 0) throw ShapeError("grid node count must be positive");
    if (!(box_.hi[i] > box_.lo[i])) throw DomainError("domain box has empty extent");
    total *= counts_[i];
    weight_ *= (box_.hi[i] - box_.lo[i]) / static_cast<double>(counts_[i]);
  }
  nodes_ = Tensor({total, d});
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t n = 0; n < total; ++n) {
    for (std::size_t i = 0; i < d; ++i) {
      const double h = (box_.hi[i] - box_.lo[i]) / static_cast<double>(counts_[i]);
      nodes_(n, i) = box_.lo[i] + (static_cast<double>(idx[i]) + 0.5) * h;
    }
    for (std::size_t i = d; i-- > 0;) {
      if (++idx[i] < counts_[i]) break;
      idx[i] = 0;
    }
  }
}

QuadratureGrid QuadratureGrid::uniform(const DomainBox& box, std::size_t nodes_per_dim) {
  return QuadratureGrid(box, std::vector<std::size_t>(box.dim(), nodes_per_dim));
}

CollocationSet draw_collocation(const DomainBox& box, std::size_t n, std::uint64_t seed) {
  return draw_collocation(box, n, 0.0, seed);
}

CollocationSet draw_collocation(const DomainBox& box, std::size_t n, double margin,
                                std::uint64_t seed) {
  Rng rng(seed);
  CollocationSet set;
  set.seed = seed;
  set.points = Tensor({n, box.dim()});
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < box.dim(); ++i) {
      const double lo = box.lo[i] + margin;
      const double hi = box.hi[i] - margin;
      if (!(hi > lo)) throw DomainError("collocation margin leaves an empty box");
      set.points(k, i) = rng.uniform(lo, hi);
    }
  }
  return set;
}

double bump_raw(std::span<const double> v, double c, std::span<const int> deriv) {
  const std::size_t d = v.size();
  int order = 0;
  int first = -1;
  int second = -1;
  if (!deriv.empty()) {
    if (deriv.size() != d) throw ShapeError("derivative multi-index has wrong length");
    for (std::size_t i = 0; i < d; ++i) {
      if (deriv[i] < 0) throw ShapeError("negative derivative order");
      for (int k = 0; k < deriv[i]; ++k) {
        if (first < 0) {
          first = static_cast<int>(i);
        } else {
          second = static_cast<int>(i);
        }
      }
      order += deriv[i];
    }
  }
  if (order > 2) throw ShapeError("bump derivatives are available up to order 2");

  double r2 = 0.0;
  for (double x : v) r2 += x * x;
  const double s = 1.0 - c * c * r2;
  if (s <= 0.0) return 0.0;
  const double q = std::exp(-1.0 / s);
  if (order == 0) return q;
  const double c2 = c * c;
  const auto phi1 = [&](int i) { return -2.0 * c2 * v[static_cast<std::size_t>(i)] / (s * s); };
  if (order == 1) return q * phi1(first);
  const double delta = first == second ? 1.0 : 0.0;
  const double phi2 = -2.0 * c2 * delta / (s * s) -
                      8.0 * c2 * c2 * v[static_cast<std::size_t>(first)] *
                          v[static_cast<std::size_t>(second)] / (s * s * s);
  return q * (phi1(first) * phi1(second) + phi2);
}

TestFunction::TestFunction(std::vector<double> center, double concentration, double norm_constant)
    : center_(std::move(center)), c_(concentration), norm_(norm_constant) {
  if (!(c_ > 0.0)) throw DomainError("bump concentration must be positive");
  if (!(norm_ > 0.0) || !std::isfinite(norm_)) throw NumericError("bump normalization is not positive");
}

TestFunction TestFunction::normalized(std::vector<double> center, double concentration,
                                      const QuadratureGrid& grid) {
  if (center.size() != grid.box().dim()) throw ShapeError("bump centre dimension mismatch");
  if (!(concentration > 0.0)) throw DomainError("bump concentration must be positive");
  std::vector<double> v(center.size());
  double z = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto y = grid.node(g);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = y[i] - center[i];
    z += bump_raw(v, concentration);
  }
  z *= grid.weight();
  if (!(z > 0.0)) {
    throw NumericError("bump support contains no quadrature node; refine the grid");
  }
  return TestFunction(std::move(center), concentration, z);
}

bool TestFunction::support_inside(const DomainBox& box) const {
  const double r = support_radius();
  for (std::size_t i = 0; i < dim(); ++i) {
    if (!(center_[i] - r > box.lo[i] && center_[i] + r < box.hi[i])) return false;
  }
  return true;
}

double TestFunction::value(std::span<const double> y) const { return derivative(y, {}); }

double TestFunction::derivative(std::span<const double> y, std::span<const int> deriv) const {
  if (y.size() != dim()) throw ShapeError("bump evaluation point dimension mismatch");
  double v[8];
  if (dim() > 8) throw ShapeError("bump dimension above 8 is not supported");
  for (std::size_t i = 0; i < dim(); ++i) v[i] = y[i] - center_[i];
  return bump_raw(std::span<const double>(v, dim()), c_, deriv) / norm_;
}

double bump_eval(const TestFunction& tf, std::span<const double> y, std::span<const int> deriv) {
  return tf.derivative(y, deriv);
}

double integrate(const std::function<double(std::span<const double>)>& f,
                 const QuadratureGrid& grid) {
  double sum = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double v = f(grid.node(g));
    if (!std::isfinite(v)) {
      throw NumericError("non-finite integrand at quadrature node " + std::to_string(g));
    }
    sum += v;
  }
  return sum * grid.weight();
}

std::vector<TestFunction> make_test_functions(const CollocationSet& centers, double concentration,
                                              const QuadratureGrid& grid) {
  std::vector<TestFunction> tfs;
  tfs.reserve(centers.size());
  for (std::size_t n = 0; n < centers.size(); ++n) {
    const auto row = centers.points.row(n);
    tfs.push_back(TestFunction::normalized(std::vector<double>(row.begin(), row.end()),
                                           concentration, grid));
  }
  return tfs;
}

Eigen::MatrixXd test_matrix(const std::vector<TestFunction>& tfs, const QuadratureGrid& grid) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(tfs.size()), static_cast<Eigen::Index>(grid.size()));
  for (std::size_t n = 0; n < tfs.size(); ++n) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(g)) =
          tfs[n].value(grid.node(g)) * grid.weight();
    }
  }
  return m;
}

}  // namespace kpinn
