#pragma once

#include <cstddef>

#include <Eigen/Core>

namespace kpinn {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Eigen::VectorXd params;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::size_t t = 0;
};

AdamState adam_init(const Eigen::VectorXd& params);

/// One bias-corrected Adam update; returns the new state.
AdamState adam_step(const AdamState& state, const Eigen::VectorXd& grad, const AdamOptions& opt = {});

}  // namespace kpinn
