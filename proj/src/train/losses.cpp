#include "kpinn/train/losses.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "kpinn/core/error.hpp"

namespace kpinn {

namespace {

// Point on edge e of [0,1]^2 at arclength fraction s: bottom, right, top, left.
std::array<double, 2> edge_point(int e, double s) {
  switch (e) {
    case 0:
      return {s, 0.0};
    case 1:
      return {1.0, s};
    case 2:
      return {s, 1.0};
    default:
      return {0.0, s};
  }
}

Eigen::VectorXd finish(GradTape& tape, double value) {
  tape.terminate(value);
  return loss_param_grad(tape);
}

}  // namespace

BoundarySet cavity_boundary(std::size_t n, double lid_u, double lid_v) {
  if (n == 0 || n % 4 != 0) throw ConfigError("boundary count must be a positive multiple of 4");
  const std::size_t per = n / 4;
  BoundarySet bc;
  bc.points = Tensor({n, 2});
  bc.targets = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), 2);
  std::size_t i = 0;
  for (int e = 0; e < 4; ++e) {
    for (std::size_t k = 0; k < per; ++k, ++i) {
      const auto p = edge_point(e, (static_cast<double>(k) + 0.5) / static_cast<double>(per));
      bc.points(i, 0) = p[0];
      bc.points(i, 1) = p[1];
      if (e == 2) {
        bc.targets(static_cast<Eigen::Index>(i), 0) = lid_u;
        bc.targets(static_cast<Eigen::Index>(i), 1) = lid_v;
      }
    }
  }
  return bc;
}

BoundarySet pma_boundary(std::size_t n, double value) {
  if (n == 0 || n % 4 != 0) throw ConfigError("boundary count must be a positive multiple of 4");
  const std::size_t per = n / 4;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  BoundarySet bc;
  bc.points = Tensor({n, 3});
  bc.targets = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n), 1, value);
  std::size_t i = 0;
  for (int e = 0; e < 4; ++e) {
    for (std::size_t k = 0; k < per; ++k, ++i) {
      const double s = (static_cast<double>(k) + 0.5) / static_cast<double>(per);
      const auto p = edge_point(e, s);
      const double t = std::fmod((static_cast<double>(k) + 0.5) * phi, 1.0);
      bc.points(i, 0) = p[0];
      bc.points(i, 1) = p[1];
      bc.points(i, 2) = t;
    }
  }
  return bc;
}

double projected_loss(const Eigen::MatrixXd& weak, const Eigen::MatrixXd& targets) {
  if (weak.rows() == 0) throw ShapeError("empty weak residual matrix");
  if (targets.size() == 0) return weak.squaredNorm() / static_cast<double>(weak.rows());
  if (targets.rows() != weak.rows() || targets.cols() != weak.cols()) {
    throw ShapeError("projection targets do not match weak residuals");
  }
  return (weak - targets).squaredNorm() / static_cast<double>(weak.rows());
}

double pinn_loss_from_residual(const Eigen::MatrixXd& residual) {
  if (residual.rows() == 0) throw ShapeError("empty residual matrix");
  return residual.squaredNorm() / static_cast<double>(residual.rows());
}

WeakResidualTerm record_vpinn(GradTape& tape, const InputNormalizer& normalizer, const PdeOperator& op,
                              const Eigen::MatrixXd& test_mat, const QuadratureGrid& grid, double weight) {
  if (test_mat.cols() != static_cast<Eigen::Index>(grid.size())) throw ShapeError("test matrix does not match grid");
  const std::size_t seg = tape.record(normalizer, grid.nodes(), op.jet_order());
  const JetBatch& jets = tape.jets(seg);
  const ResidualBatch res = evaluate_residual(op, jets, grid.nodes());
  const Eigen::MatrixXd weak = test_mat * res.values;
  WeakResidualTerm out;
  out.loss = projected_loss(weak);
  out.clamp_events = res.clamp_events;
  if (weight != 0.0) {
    const Eigen::MatrixXd d_res = (2.0 * weight / static_cast<double>(weak.rows())) * (test_mat.transpose() * weak);
    tape.seed(seg, residual_pullback(op, jets, res, d_res));
  }
  out.nodal = res.values;
  return out;
}

double record_pinn(GradTape& tape, const InputNormalizer& normalizer, const PdeOperator& op,
                   const Tensor& collocation, double weight, std::size_t* clamp_events) {
  const std::size_t seg = tape.record(normalizer, collocation, op.jet_order());
  const JetBatch& jets = tape.jets(seg);
  const ResidualBatch res = evaluate_residual(op, jets, collocation);
  if (clamp_events) *clamp_events += res.clamp_events;
  const double loss = pinn_loss_from_residual(res.values);
  if (weight != 0.0) {
    const Eigen::MatrixXd d_res = (2.0 * weight / static_cast<double>(res.values.rows())) * res.values;
    tape.seed(seg, residual_pullback(op, jets, res, d_res));
  }
  return loss;
}

double record_bc(GradTape& tape, const InputNormalizer& normalizer, const BoundarySet& bc, double weight) {
  const std::size_t n = bc.size();
  if (n == 0 || bc.targets.rows() != static_cast<Eigen::Index>(n)) throw ShapeError("malformed boundary set");
  const std::size_t seg = tape.record(normalizer, bc.points, 0);
  const JetBatch& jets = tape.jets(seg);
  const auto cols = static_cast<std::size_t>(bc.targets.cols());
  if (cols > jets.out_dim()) throw ShapeError("boundary targets exceed network outputs");
  JetBatch adj = JetBatch::zeros(n, jets.out_dim(), jets.input_dim, 0);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double d = jets.value(i, c) - bc.targets(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
      loss += d * d;
      adj.value(i, c) = 2.0 * weight * d / static_cast<double>(n);
    }
  }
  loss /= static_cast<double>(n);
  if (weight != 0.0) tape.seed(seg, adj);
  return loss;
}

double record_pressure_pin(GradTape& tape, const InputNormalizer& normalizer, double weight) {
  if (tape.params().output_dim() != 3 || tape.params().input_dim() != 2) {
    throw ConfigError("pressure pin needs a Navier-Stokes network (2 inputs, 3 outputs)");
  }
  const Tensor pt({1, 2}, std::vector<double>{0.5, 0.5});
  const std::size_t seg = tape.record(normalizer, pt, 0);
  const double p = tape.jets(seg).value(0, 2);
  if (weight != 0.0) {
    JetBatch adj = JetBatch::zeros(1, 3, 2, 0);
    adj.value(0, 2) = 2.0 * weight * p;
    tape.seed(seg, adj);
  }
  return p * p;
}

LossValue vpinn_loss(const MlpParams& params, const InputNormalizer& normalizer, const PdeOperator& op,
                     const Eigen::MatrixXd& test_mat, const QuadratureGrid& grid, bool with_gradient) {
  GradTape tape(params);
  const WeakResidualTerm t = record_vpinn(tape, normalizer, op, test_mat, grid, with_gradient ? 1.0 : 0.0);
  LossValue out{t.loss, {}, t.clamp_events};
  if (with_gradient) out.gradient = finish(tape, t.loss);
  return out;
}

LossValue pinn_loss(const MlpParams& params, const InputNormalizer& normalizer, const PdeOperator& op,
                    const Tensor& collocation, bool with_gradient) {
  GradTape tape(params);
  LossValue out;
  out.value = record_pinn(tape, normalizer, op, collocation, with_gradient ? 1.0 : 0.0, &out.clamp_events);
  if (with_gradient) out.gradient = finish(tape, out.value);
  return out;
}

LossValue bc_loss(const MlpParams& params, const InputNormalizer& normalizer, const BoundarySet& bc,
                  bool with_gradient) {
  GradTape tape(params);
  LossValue out;
  out.value = record_bc(tape, normalizer, bc, with_gradient ? 1.0 : 0.0);
  if (with_gradient) out.gradient = finish(tape, out.value);
  return out;
}

LossValue pressure_pin_loss(const MlpParams& params, const InputNormalizer& normalizer, bool with_gradient) {
  GradTape tape(params);
  LossValue out;
  out.value = record_pressure_pin(tape, normalizer, with_gradient ? 1.0 : 0.0);
  if (with_gradient) out.gradient = finish(tape, out.value);
  return out;
}

}  // namespace kpinn
