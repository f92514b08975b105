#include "kpinn/operators/pde_operator.hpp"

#include "kpinn/core/error.hpp"

namespace kpinn {

std::string to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::NavierStokes2D:
      return "navier-stokes";
    case OperatorKind::ParabolicMongeAmpere:
      return "monge-ampere";
    case OperatorKind::DerivativeSum:
      return "derivative-sum";
  }
  return "unknown";
}

std::string to_string(BoundTheorem t) {
  switch (t) {
    case BoundTheorem::Linear:
      return "linear";
    case BoundTheorem::Polynomial:
      return "poly";
    case BoundTheorem::NonlinearOfLinear:
      return "nonlinear-linear";
  }
  return "unknown";
}

BoundTheorem parse_theorem(const std::string& s) {
  if (s == "linear") return BoundTheorem::Linear;
  if (s == "poly") return BoundTheorem::Polynomial;
  if (s == "nonlinear-linear") return BoundTheorem::NonlinearOfLinear;
  throw ConfigError("unknown theorem tag '" + s + "'");
}

PdeOperator PdeOperator::navier_stokes(double reynolds) {
  PdeOperator op;
  op.kind = OperatorKind::NavierStokes2D;
  op.reynolds = reynolds;
  // The convection term is an exact quadratic: no Taylor remainder.
  op.nonlinearity_order = 2;
  op.remainder_bound = 0.0;
  op.dim = 2;
  op.validate();
  return op;
}

PdeOperator PdeOperator::monge_ampere(const PmaSource& source, int order, double expansion_point) {
  PdeOperator op;
  op.kind = OperatorKind::ParabolicMongeAmpere;
  op.source = source;
  op.nonlinearity_order = order;
  op.expansion_point = expansion_point;
  op.dim = 3;
  op.validate();
  return op;
}

PdeOperator PdeOperator::derivative_sum(std::size_t dim) {
  PdeOperator op;
  op.kind = OperatorKind::DerivativeSum;
  op.nonlinearity_order = 1;
  op.remainder_bound = 0.0;
  op.dim = dim;
  op.validate();
  return op;
}

std::size_t PdeOperator::input_dim() const {
  switch (kind) {
    case OperatorKind::NavierStokes2D:
      return 2;
    case OperatorKind::ParabolicMongeAmpere:
      return 3;
    case OperatorKind::DerivativeSum:
      return dim;
  }
  return dim;
}

std::size_t PdeOperator::output_dim() const {
  return kind == OperatorKind::NavierStokes2D ? 3 : 1;
}

std::size_t PdeOperator::channels() const {
  return kind == OperatorKind::NavierStokes2D ? 3 : 1;
}

int PdeOperator::jet_order() const { return kind == OperatorKind::DerivativeSum ? 1 : 2; }

BoundTheorem PdeOperator::theorem() const {
  switch (kind) {
    case OperatorKind::NavierStokes2D:
      return BoundTheorem::Polynomial;
    case OperatorKind::ParabolicMongeAmpere:
      return BoundTheorem::NonlinearOfLinear;
    case OperatorKind::DerivativeSum:
      return BoundTheorem::Linear;
  }
  return BoundTheorem::Linear;
}

void PdeOperator::validate() const {
  if (nonlinearity_order < 1) throw ConfigError("nonlinearity order must be >= 1");
  if (!(remainder_bound >= 0.0)) throw ConfigError("remainder bound must be >= 0");
  if (kind == OperatorKind::NavierStokes2D) {
    if (!(reynolds > 0.0)) throw ConfigError("Reynolds number must be positive");
    if (nonlinearity_order != 2) throw ConfigError("Navier-Stokes convection has order r = 2");
  }
  if (kind == OperatorKind::ParabolicMongeAmpere) {
    if (!(expansion_point > 0.0)) throw ConfigError("log expansion point must be positive");
    if (!(det_floor > 0.0)) throw ConfigError("determinant floor must be positive");
  }
  if (kind == OperatorKind::DerivativeSum && dim == 0) throw ConfigError("dimension must be positive");
}

namespace {

void check_jets(const PdeOperator& op, const JetBatch& jets, const Tensor& points) {
  if (jets.out_dim() != op.output_dim() || jets.input_dim != op.input_dim()) {
    throw ShapeError("network shape does not match operator " + to_string(op.kind));
  }
  if (jets.order < op.jet_order()) throw ShapeError("residual needs higher-order jets");
  if (points.rank() != 2 || points.dim(0) != jets.batch() || points.dim(1) != op.input_dim()) {
    throw ShapeError("residual points do not match jets");
  }
}

}  // namespace

ResidualBatch evaluate_residual(const PdeOperator& op, const JetBatch& jets, const Tensor& points) {
  check_jets(op, jets, points);
  const std::size_t batch = jets.batch();
  ResidualBatch res;
  res.values.resize(static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(op.channels()));
  res.clamped.assign(batch, 0);
  const auto& v = jets.value;
  const auto& j = jets.jacobian;
  const auto& h = jets.hessian;
  for (std::size_t b = 0; b < batch; ++b) {
    const auto bi = static_cast<Eigen::Index>(b);
    switch (op.kind) {
      case OperatorKind::NavierStokes2D: {
        const double u1 = v(b, 0);
        const double u2 = v(b, 1);
        const double inv_re = 1.0 / op.reynolds;
        res.values(bi, 0) = u1 * j(b, 0, 0) + u2 * j(b, 0, 1) + j(b, 2, 0) -
                            inv_re * (h(b, 0, 0, 0) + h(b, 0, 1, 1));
        res.values(bi, 1) = u1 * j(b, 1, 0) + u2 * j(b, 1, 1) + j(b, 2, 1) -
                            inv_re * (h(b, 1, 0, 0) + h(b, 1, 1, 1));
        res.values(bi, 2) = j(b, 0, 0) + j(b, 1, 1);
        break;
      }
      case OperatorKind::ParabolicMongeAmpere: {
        const double det = h(b, 0, 0, 0) * h(b, 0, 1, 1) - h(b, 0, 0, 1) * h(b, 0, 1, 0);
        double log_det;
        if (det <= op.det_floor) {
          log_det = std::log(op.det_floor);
          res.clamped[b] = 1;
          ++res.clamp_events;
        } else {
          log_det = std::log(det);
        }
        res.values(bi, 0) = -j(b, 0, 2) + log_det - op.source(points(b, 0), points(b, 1));
        break;
      }
      case OperatorKind::DerivativeSum: {
        double s = 0.0;
        for (std::size_t i = 0; i < op.dim; ++i) s += j(b, 0, i);
        res.values(bi, 0) = s;
        break;
      }
    }
  }
  if (!res.values.allFinite()) throw NumericError("non-finite residual value");
  return res;
}

JetBatch residual_pullback(const PdeOperator& op, const JetBatch& jets, const ResidualBatch& res,
                           const Eigen::MatrixXd& adjoint) {
  const std::size_t batch = jets.batch();
  if (adjoint.rows() != static_cast<Eigen::Index>(batch) ||
      adjoint.cols() != static_cast<Eigen::Index>(op.channels())) {
    throw ShapeError("residual adjoint has wrong shape");
  }
  JetBatch adj = JetBatch::zeros(batch, op.output_dim(), op.input_dim(), op.jet_order());
  const auto& v = jets.value;
  const auto& j = jets.jacobian;
  const auto& h = jets.hessian;
  for (std::size_t b = 0; b < batch; ++b) {
    const auto bi = static_cast<Eigen::Index>(b);
    switch (op.kind) {
      case OperatorKind::NavierStokes2D: {
        const double u1 = v(b, 0);
        const double u2 = v(b, 1);
        const double inv_re = 1.0 / op.reynolds;
        const double g1 = adjoint(bi, 0);
        const double g2 = adjoint(bi, 1);
        const double g3 = adjoint(bi, 2);
        adj.value(b, 0) += g1 * j(b, 0, 0) + g2 * j(b, 1, 0);
        adj.value(b, 1) += g1 * j(b, 0, 1) + g2 * j(b, 1, 1);
        adj.jacobian(b, 0, 0) += g1 * u1 + g3;
        adj.jacobian(b, 0, 1) += g1 * u2;
        adj.jacobian(b, 1, 0) += g2 * u1;
        adj.jacobian(b, 1, 1) += g2 * u2 + g3;
        adj.jacobian(b, 2, 0) += g1;
        adj.jacobian(b, 2, 1) += g2;
        adj.hessian(b, 0, 0, 0) -= g1 * inv_re;
        adj.hessian(b, 0, 1, 1) -= g1 * inv_re;
        adj.hessian(b, 1, 0, 0) -= g2 * inv_re;
        adj.hessian(b, 1, 1, 1) -= g2 * inv_re;
        break;
      }
      case OperatorKind::ParabolicMongeAmpere: {
        const double g = adjoint(bi, 0);
        adj.jacobian(b, 0, 2) -= g;
        if (!res.clamped[b]) {
          const double det = h(b, 0, 0, 0) * h(b, 0, 1, 1) - h(b, 0, 0, 1) * h(b, 0, 1, 0);
          const double s = g / det;
          adj.hessian(b, 0, 0, 0) += s * h(b, 0, 1, 1);
          adj.hessian(b, 0, 1, 1) += s * h(b, 0, 0, 0);
          adj.hessian(b, 0, 0, 1) -= s * h(b, 0, 1, 0);
          adj.hessian(b, 0, 1, 0) -= s * h(b, 0, 0, 1);
        }
        break;
      }
      case OperatorKind::DerivativeSum: {
        for (std::size_t i = 0; i < op.dim; ++i) adj.jacobian(b, 0, i) += adjoint(bi, 0);
        break;
      }
    }
  }
  return adj;
}

ResidualBatch network_residual(const PdeOperator& op, const MlpParams& params,
                               const InputNormalizer& normalizer, const Tensor& points) {
  const JetBatch jets = propagate_jets(params, normalizer, points, op.jet_order());
  return evaluate_residual(op, jets, points);
}

NsResidual ns_residual(const MlpParams& params, const InputNormalizer& normalizer,
                       std::span<const double> x, double reynolds) {
  const PdeOperator op = PdeOperator::navier_stokes(reynolds);
  if (x.size() != 2) throw ShapeError("Navier-Stokes residual takes a 2-D point");
  const Tensor pt({1, 2}, std::vector<double>(x.begin(), x.end()));
  const ResidualBatch r = network_residual(op, params, normalizer, pt);
  return NsResidual{{r.values(0, 0), r.values(0, 1)}, r.values(0, 2)};
}

PmaResidual pma_residual(const MlpParams& params, const InputNormalizer& normalizer,
                         std::span<const double> xt, const PmaSource& source, double det_floor) {
  PdeOperator op = PdeOperator::monge_ampere(source);
  op.det_floor = det_floor;
  if (xt.size() != 3) throw ShapeError("Monge-Ampere residual takes an (x, y, t) point");
  const Tensor pt({1, 3}, std::vector<double>(xt.begin(), xt.end()));
  const ResidualBatch r = network_residual(op, params, normalizer, pt);
  return PmaResidual{r.values(0, 0), r.clamped[0] != 0};
}

}  // namespace kpinn
