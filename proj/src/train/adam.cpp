#include "kpinn/train/adam.hpp"

#include <cmath>

#include "kpinn/core/error.hpp"

namespace kpinn {

AdamState adam_init(const Eigen::VectorXd& params) {
  AdamState s;
  s.params = params;
  s.m = Eigen::VectorXd::Zero(params.size());
  s.v = Eigen::VectorXd::Zero(params.size());
  return s;
}

AdamState adam_step(const AdamState& state, const Eigen::VectorXd& grad, const AdamOptions& opt) {
  if (grad.size() != state.params.size() || state.m.size() != state.params.size() ||
      state.v.size() != state.params.size()) {
    throw ShapeError("Adam state and gradient sizes differ");
  }
  if (!grad.allFinite()) throw NumericError("non-finite gradient");
  AdamState next;
  next.t = state.t + 1;
  next.m = opt.beta1 * state.m + (1.0 - opt.beta1) * grad;
  next.v = opt.beta2 * state.v + (1.0 - opt.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(next.t));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(next.t));
  next.params = state.params.array() -
                opt.learning_rate * (next.m.array() / c1) / ((next.v.array() / c2).sqrt() + opt.epsilon);
  return next;
}

}  // namespace kpinn
