#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "kpinn/autodiff/jets.hpp"

namespace kpinn {

/// Record of a scalar loss built from one or more jet evaluations of the same
/// network plus optional direct parameter terms (e.g. a regularizer).
///
/// Usage: record() each batch, seed() the adjoint d(loss)/d(jets) of every
/// segment that contributes, add_direct() any closed-form parameter gradient,
/// then terminate() with the loss value. loss_param_grad() replays the
/// segments in recording order, so the reduction order is fixed.
class GradTape {
 public:
  explicit GradTape(MlpParams params);

  const MlpParams& params() const { return params_; }

  /// Returns the segment id.
  std::size_t record(const InputNormalizer& normalizer, const Tensor& x, int order);
  const JetBatch& jets(std::size_t segment) const;

  /// Accumulates an adjoint on the segment's output jets.
  void seed(std::size_t segment, const JetBatch& adjoint);
  void add_direct(const Eigen::VectorXd& grad);

  void terminate(double loss) {
    loss_ = loss;
    terminated_ = true;
  }
  bool terminated() const { return terminated_; }
  double loss() const { return loss_; }

 private:
  friend Eigen::VectorXd loss_param_grad(const GradTape& tape);

  struct Segment {
    std::unique_ptr<JetTape> tape;
    JetBatch adjoint;
    bool seeded = false;
  };

  MlpParams params_;
  std::vector<Segment> segments_;
  Eigen::VectorXd direct_;
  double loss_ = 0.0;
  bool terminated_ = false;
};

/// d(loss)/d(theta) in the flat parameter layout. Throws if the tape was not
/// terminated in a scalar.
Eigen::VectorXd loss_param_grad(const GradTape& tape);

}  // namespace kpinn
