#include "kpinn/autodiff/grad_tape.hpp"

#include "kpinn/core/error.hpp"

namespace kpinn {

namespace {

void accumulate(Tensor& into, const Tensor& from) {
  if (from.size() == 0) return;
  if (into.shape() != from.shape()) throw ShapeError("adjoint shape mismatch");
  auto dst = into.data();
  auto src = from.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

GradTape::GradTape(MlpParams params)
    : params_(std::move(params)),
      direct_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(params_.num_params()))) {}

std::size_t GradTape::record(const InputNormalizer& normalizer, const Tensor& x, int order) {
  Segment seg;
  seg.tape = std::make_unique<JetTape>(params_, normalizer, x, order);
  const JetBatch& j = seg.tape->jets();
  seg.adjoint = JetBatch::zeros(j.batch(), j.out_dim(), j.input_dim, order);
  segments_.push_back(std::move(seg));
  return segments_.size() - 1;
}

const JetBatch& GradTape::jets(std::size_t segment) const {
  if (segment >= segments_.size()) throw ShapeError("unknown tape segment");
  return segments_[segment].tape->jets();
}

void GradTape::seed(std::size_t segment, const JetBatch& adjoint) {
  if (segment >= segments_.size()) throw ShapeError("unknown tape segment");
  Segment& seg = segments_[segment];
  if (adjoint.order > seg.adjoint.order) throw ShapeError("adjoint order exceeds recorded order");
  accumulate(seg.adjoint.value, adjoint.value);
  if (adjoint.order >= 1) accumulate(seg.adjoint.jacobian, adjoint.jacobian);
  if (adjoint.order >= 2) accumulate(seg.adjoint.hessian, adjoint.hessian);
  seg.seeded = true;
}

void GradTape::add_direct(const Eigen::VectorXd& grad) {
  if (grad.size() != direct_.size()) throw ShapeError("direct gradient has wrong length");
  direct_ += grad;
}

Eigen::VectorXd loss_param_grad(const GradTape& tape) {
  if (!tape.terminated()) throw Error("gradient requested from a tape without a scalar loss");
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(tape.direct_.size());
  for (const auto& seg : tape.segments_) {
    if (seg.seeded) seg.tape->backward(seg.adjoint, grad);
  }
  grad += tape.direct_;
  return grad;
}

}  // namespace kpinn
