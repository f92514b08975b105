#pragma once

#include <functional>

#include <Eigen/Core>

namespace kpinn {

/// A scalar map together with its claimed gradient.
struct ScalarObjective {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};

struct FdCheckResult {
  double max_rel_error = 0.0;
  Eigen::Index worst_index = -1;
  Eigen::VectorXd analytic;
  Eigen::VectorXd numeric;
};

/// Central differences per coordinate; error per coordinate is
/// |analytic - fd| / (|fd| + 1e-12).
FdCheckResult fd_check_detailed(const ScalarObjective& f, const Eigen::VectorXd& point,
                                double step);

/// Max relative gradient error (see fd_check_detailed).
double fd_check(const ScalarObjective& f, const Eigen::VectorXd& point, double step);

}  // namespace kpinn
