#include "kpinn/autodiff/jets.hpp"

#include <cmath>
#include <string>

#include "kpinn/core/error.hpp"

namespace kpinn {

namespace {

struct ActivationDerivs {
  double s0, s1, s2, s3;
};

inline ActivationDerivs activation_derivs(Activation a, double z) {
  if (a == Activation::Tanh) {
    const double t = std::tanh(z);
    const double s1 = 1.0 - t * t;
    return {t, s1, -2.0 * t * s1, -2.0 * s1 * s1 + 4.0 * t * t * s1};
  }
  // Sigmoid
  const double s = 1.0 / (1.0 + std::exp(-z));
  const double s1 = s * (1.0 - s);
  const double s2 = s1 * (1.0 - 2.0 * s);
  return {s, s1, s2, s2 * (1.0 - 2.0 * s) - 2.0 * s1 * s1};
}

/// Upper-triangular pair list (i <= j) in storage order.
std::vector<std::pair<std::size_t, std::size_t>> pair_list(std::size_t d) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) pairs.emplace_back(i, j);
  }
  return pairs;
}

}  // namespace

std::size_t jet_width(std::size_t in_dim, int order) {
  std::size_t k = 1;
  if (order >= 1) k += in_dim;
  if (order >= 2) k += in_dim * (in_dim + 1) / 2;
  return k;
}

JetBatch JetBatch::zeros(std::size_t batch, std::size_t out, std::size_t in, int order) {
  JetBatch j;
  j.order = order;
  j.input_dim = in;
  j.value = Tensor({batch, out});
  if (order >= 1) j.jacobian = Tensor({batch, out, in});
  if (order >= 2) j.hessian = Tensor({batch, out, in, in});
  return j;
}

JetTape::JetTape(const MlpParams& params, const InputNormalizer& normalizer, const Tensor& x,
                 int order)
    : params_(params), order_(order) {
  run(&normalizer, x);
}

JetTape::JetTape(const MlpParams& params, const Tensor& x, int order)
    : params_(params), order_(order) {
  run(nullptr, x);
}

void JetTape::run(const InputNormalizer* normalizer, const Tensor& x) {
  params_.validate();
  if (order_ < 0 || order_ > 2) throw ShapeError("jet order must be 0, 1 or 2");
  if (x.rank() != 2) throw ShapeError("inputs must have shape (batch, d_in)");
  in_dim_ = params_.input_dim();
  if (x.dim(1) != in_dim_) {
    throw ShapeError("input dimension " + std::to_string(x.dim(1)) + " does not match network " +
                     std::to_string(in_dim_));
  }
  if (normalizer != nullptr && normalizer->dim() != in_dim_) {
    throw ShapeError("normalizer dimension does not match network input");
  }
  batch_ = x.dim(0);
  k_ = jet_width(in_dim_, order_);
  const std::size_t d = in_dim_;
  const auto pairs = pair_list(d);
  const auto cols = static_cast<Eigen::Index>(batch_ * k_);

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), cols);
  for (std::size_t b = 0; b < batch_; ++b) {
    const auto row = x.row(b);
    if (normalizer != nullptr && !normalizer->contains(row)) {
      throw DomainError("input point " + std::to_string(b) + " lies outside the domain box");
    }
    const auto base = static_cast<Eigen::Index>(b * k_);
    for (std::size_t i = 0; i < d; ++i) {
      const double scale = normalizer != nullptr ? normalizer->scale(i) : 1.0;
      const double shift = normalizer != nullptr ? normalizer->shift(i) : 0.0;
      a(static_cast<Eigen::Index>(i), base) = scale * row[i] + shift;
      if (order_ >= 1) a(static_cast<Eigen::Index>(i), base + 1 + static_cast<Eigen::Index>(i)) = scale;
    }
  }
  if (!a.allFinite()) throw NumericError("non-finite network input");

  const std::size_t num_layers = params_.layers.size();
  layer_inputs_.resize(num_layers);
  preacts_.resize(num_layers);
  d1_.assign(num_layers, {});
  d2_.assign(num_layers, {});
  d3_.assign(num_layers, {});

  for (std::size_t l = 0; l < num_layers; ++l) {
    const DenseLayer& layer = params_.layers[l];
    Eigen::MatrixXd z = layer.weight * a;
    for (std::size_t b = 0; b < batch_; ++b) z.col(static_cast<Eigen::Index>(b * k_)) += layer.bias;
    if (!z.allFinite()) {
      throw NumericError("non-finite pre-activation in layer " + std::to_string(l + 1));
    }
    layer_inputs_[l] = std::move(a);

    if (layer.activation == Activation::None) {
      a = z;
    } else {
      const Eigen::Index units = z.rows();
      a.resize(units, cols);
      Eigen::MatrixXd& d1 = d1_[l];
      Eigen::MatrixXd& d2 = d2_[l];
      Eigen::MatrixXd& d3 = d3_[l];
      d1.resize(units, static_cast<Eigen::Index>(batch_));
      d2.resize(units, static_cast<Eigen::Index>(batch_));
      d3.resize(units, static_cast<Eigen::Index>(batch_));
      for (std::size_t b = 0; b < batch_; ++b) {
        const auto base = static_cast<Eigen::Index>(b * k_);
        const auto bi = static_cast<Eigen::Index>(b);
        for (Eigen::Index u = 0; u < units; ++u) {
          const ActivationDerivs s = activation_derivs(layer.activation, z(u, base));
          d1(u, bi) = s.s1;
          d2(u, bi) = s.s2;
          d3(u, bi) = s.s3;
          a(u, base) = s.s0;
          if (order_ >= 1) {
            for (std::size_t m = 0; m < d; ++m) {
              const auto c = base + 1 + static_cast<Eigen::Index>(m);
              a(u, c) = s.s1 * z(u, c);
            }
          }
          if (order_ >= 2) {
            for (std::size_t p = 0; p < pairs.size(); ++p) {
              const auto c = base + 1 + static_cast<Eigen::Index>(d + p);
              const double zi = z(u, base + 1 + static_cast<Eigen::Index>(pairs[p].first));
              const double zj = z(u, base + 1 + static_cast<Eigen::Index>(pairs[p].second));
              a(u, c) = s.s2 * zi * zj + s.s1 * z(u, c);
            }
          }
        }
      }
    }
    preacts_[l] = std::move(z);
  }

  // Unpack the output jets.
  const std::size_t out = params_.output_dim();
  jets_ = JetBatch::zeros(batch_, out, d, order_);
  for (std::size_t b = 0; b < batch_; ++b) {
    const auto base = static_cast<Eigen::Index>(b * k_);
    for (std::size_t o = 0; o < out; ++o) {
      const auto oi = static_cast<Eigen::Index>(o);
      jets_.value(b, o) = a(oi, base);
      if (order_ >= 1) {
        for (std::size_t m = 0; m < d; ++m) {
          jets_.jacobian(b, o, m) = a(oi, base + 1 + static_cast<Eigen::Index>(m));
        }
      }
      if (order_ >= 2) {
        for (std::size_t p = 0; p < pairs.size(); ++p) {
          const double h = a(oi, base + 1 + static_cast<Eigen::Index>(d + p));
          jets_.hessian(b, o, pairs[p].first, pairs[p].second) = h;
          jets_.hessian(b, o, pairs[p].second, pairs[p].first) = h;
        }
      }
    }
  }
}

void JetTape::backward(const JetBatch& adjoint, Eigen::VectorXd& grad) const {
  const std::size_t d = in_dim_;
  const std::size_t out = params_.output_dim();
  if (adjoint.value.rank() != 2 || adjoint.batch() != batch_ || adjoint.out_dim() != out) {
    throw ShapeError("adjoint jets do not match the recorded batch");
  }
  if (adjoint.order > order_) throw ShapeError("adjoint order exceeds recorded jet order");
  if (static_cast<std::size_t>(grad.size()) != params_.num_params()) {
    throw ShapeError("gradient buffer does not match parameter count");
  }
  const auto pairs = pair_list(d);
  const auto cols = static_cast<Eigen::Index>(batch_ * k_);

  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out), cols);
  for (std::size_t b = 0; b < batch_; ++b) {
    const auto base = static_cast<Eigen::Index>(b * k_);
    for (std::size_t o = 0; o < out; ++o) {
      const auto oi = static_cast<Eigen::Index>(o);
      g(oi, base) = adjoint.value(b, o);
      if (adjoint.order >= 1) {
        for (std::size_t m = 0; m < d; ++m) {
          g(oi, base + 1 + static_cast<Eigen::Index>(m)) = adjoint.jacobian(b, o, m);
        }
      }
      if (adjoint.order >= 2) {
        for (std::size_t p = 0; p < pairs.size(); ++p) {
          const auto [i, j] = pairs[p];
          double v = adjoint.hessian(b, o, i, j);
          if (i != j) v += adjoint.hessian(b, o, j, i);
          g(oi, base + 1 + static_cast<Eigen::Index>(d + p)) = v;
        }
      }
    }
  }

  for (std::size_t l = params_.layers.size(); l-- > 0;) {
    const DenseLayer& layer = params_.layers[l];
    if (layer.activation != Activation::None) {
      const Eigen::MatrixXd& z = preacts_[l];
      const Eigen::MatrixXd& d1 = d1_[l];
      const Eigen::MatrixXd& d2 = d2_[l];
      const Eigen::MatrixXd& d3 = d3_[l];
      Eigen::MatrixXd gz(g.rows(), cols);
      for (std::size_t b = 0; b < batch_; ++b) {
        const auto base = static_cast<Eigen::Index>(b * k_);
        const auto bi = static_cast<Eigen::Index>(b);
        for (Eigen::Index u = 0; u < g.rows(); ++u) {
          const double s1 = d1(u, bi);
          const double s2 = d2(u, bi);
          const double s3 = d3(u, bi);
          double gz0 = g(u, base) * s1;
          if (order_ >= 1) {
            for (std::size_t m = 0; m < d; ++m) {
              const auto c = base + 1 + static_cast<Eigen::Index>(m);
              gz0 += g(u, c) * s2 * z(u, c);
              gz(u, c) = g(u, c) * s1;
            }
          }
          if (order_ >= 2) {
            for (std::size_t p = 0; p < pairs.size(); ++p) {
              const auto c = base + 1 + static_cast<Eigen::Index>(d + p);
              const auto ci = base + 1 + static_cast<Eigen::Index>(pairs[p].first);
              const auto cj = base + 1 + static_cast<Eigen::Index>(pairs[p].second);
              const double gp = g(u, c);
              gz0 += gp * (s3 * z(u, ci) * z(u, cj) + s2 * z(u, c));
              gz(u, ci) += gp * s2 * z(u, cj);
              gz(u, cj) += gp * s2 * z(u, ci);
              gz(u, c) = gp * s1;
            }
          }
          gz(u, base) = gz0;
        }
      }
      g = std::move(gz);
    }

    const std::size_t offset = params_.flat_offset(l);
    const auto rows = layer.weight.rows();
    const auto in = layer.weight.cols();
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> gw(
        grad.data() + offset, rows, in);
    gw.noalias() += g * layer_inputs_[l].transpose();
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + offset + rows * in, rows);
    for (std::size_t b = 0; b < batch_; ++b) gb += g.col(static_cast<Eigen::Index>(b * k_));
    if (l > 0) g = layer.weight.transpose() * g;
  }
}

JetBatch propagate_jets(const MlpParams& params, const InputNormalizer& normalizer,
                        const Tensor& inputs, int order) {
  return JetTape(params, normalizer, inputs, order).jets();
}

JetBatch propagate_jets(const MlpParams& params, const Tensor& inputs, int order) {
  return JetTape(params, inputs, order).jets();
}

}  // namespace kpinn
