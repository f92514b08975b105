#include "kpinn/autodiff/fd_check.hpp"

#include <cmath>

#include "kpinn/core/error.hpp"

namespace kpinn {

FdCheckResult fd_check_detailed(const ScalarObjective& f, const Eigen::VectorXd& point,
                                double step) {
  if (!(step > 0.0)) throw DomainError("finite-difference step must be positive");
  FdCheckResult res;
  res.analytic = f.gradient(point);
  if (res.analytic.size() != point.size()) throw ShapeError("gradient length mismatch");
  res.numeric.resize(point.size());
  Eigen::VectorXd x = point;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    x[i] = point[i] + step;
    const double fp = f.value(x);
    x[i] = point[i] - step;
    const double fm = f.value(x);
    x[i] = point[i];
    const double fd = (fp - fm) / (2.0 * step);
    res.numeric[i] = fd;
    const double err = std::abs(res.analytic[i] - fd) / (std::abs(fd) + 1e-12);
    if (res.worst_index < 0 || err > res.max_rel_error) {
      res.max_rel_error = err;
      res.worst_index = i;
    }
  }
  return res;
}

double fd_check(const ScalarObjective& f, const Eigen::VectorXd& point, double step) {
  return fd_check_detailed(f, point, step).max_rel_error;
}

}  // namespace kpinn
