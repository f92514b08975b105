#include "kpinn/bound/koopman.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "kpinn/core/error.hpp"

namespace kpinn {

namespace {

// log cosh(m) without overflow.
double log_cosh(double m) {
  const double a = std::abs(m);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

// log(2 + 2 cosh m) = log(4 cosh^2(m/2)).
double log_sigmoid_factor(double m) {
  const double a = std::abs(m);
  return a + 2.0 * std::log1p(std::exp(-a));
}

// d/da of the per-coordinate log factor.
double log_factor_slope(Activation act, double a) {
  switch (act) {
    case Activation::Tanh:
      return 2.0 * std::tanh(a);
    case Activation::Sigmoid:
      return std::tanh(0.5 * a);
    case Activation::None:
      return 0.0;
  }
  return 0.0;
}

Eigen::BDCSVD<Eigen::MatrixXd> svd_of(const Eigen::MatrixXd& w) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericError("SVD failed");
  return svd;
}

}  // namespace

double Interval::magnitude() const { return std::max(std::abs(lo), std::abs(hi)); }

SpectralNorm spectral_norm(const Eigen::MatrixXd& w) {
  if (w.size() == 0) throw ShapeError("empty matrix");
  const auto svd = svd_of(w);
  SpectralNorm s;
  s.value = svd.singularValues()(0);
  s.u = svd.matrixU().col(0);
  s.v = svd.matrixV().col(0);
  s.converged = true;
  return s;
}

SpectralNorm spectral_norm_power(const Eigen::MatrixXd& w, int max_iters, double tol) {
  if (w.size() == 0) throw ShapeError("empty matrix");
  SpectralNorm s;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(w.cols()) / std::sqrt(static_cast<double>(w.cols()));
  double prev = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd u = w * v;
    const double un = u.norm();
    if (un == 0.0) break;
    u /= un;
    Eigen::VectorXd nv = w.transpose() * u;
    const double sigma = nv.norm();
    if (sigma == 0.0) break;
    v = nv / sigma;
    s.value = sigma;
    s.u = u;
    s.iterations = it + 1;
    if (std::abs(sigma - prev) <= tol * sigma) {
      s.converged = true;
      break;
    }
    prev = sigma;
  }
  s.v = v;
  return s;
}

std::vector<LayerBox> propagate_boxes(const MlpParams& params) {
  params.validate();
  std::vector<LayerBox> boxes;
  double m = 1.0;
  for (const auto& layer : params.layers) {
    LayerBox box;
    box.input_bound = m;
    box.spectral_norm = spectral_norm(layer.weight).value;
    box.bias_inf = layer.bias.size() > 0 ? layer.bias.cwiseAbs().maxCoeff() : 0.0;
    box.degenerate = box.spectral_norm == 0.0;
    box.half_width = box.spectral_norm * m + box.bias_inf;
    box.intervals.assign(static_cast<std::size_t>(layer.weight.rows()),
                         Interval{-box.half_width, box.half_width});
    m = layer.activation == Activation::None ? box.half_width : 1.0;
    boxes.push_back(std::move(box));
  }
  return boxes;
}

double log_koopman_factor(Activation act, const std::vector<Interval>& box) {
  double s = 0.0;
  for (const auto& iv : box) {
    if (iv.lo > iv.hi) throw DomainError("empty interval");
    switch (act) {
      case Activation::Tanh:
        s += 2.0 * log_cosh(iv.magnitude());
        break;
      case Activation::Sigmoid:
        s += log_sigmoid_factor(iv.magnitude());
        break;
      case Activation::None:
        break;
    }
  }
  return s;
}

double log_koopman_factor(Activation act, double a, std::size_t d) {
  return log_koopman_factor(act, std::vector<Interval>(d, Interval{-a, a}));
}

double koopman_factor(Activation act, const std::vector<Interval>& box) {
  return std::exp(log_koopman_factor(act, box));
}

double a_tilde(double a) {
  if (!(a > 0.0)) throw DomainError("A must be positive");
  return 1.0 / (1.0 + 1.0 / a);
}

double a_tilde_from_log(double log_a) {
  if (log_a >= 0.0) return 1.0 / (1.0 + std::exp(-log_a));
  const double e = std::exp(log_a);
  return e / (1.0 + e);
}

SingularSummary geo_mean_singular(const Eigen::MatrixXd& w) {
  if (w.size() == 0) throw ShapeError("empty matrix");
  const auto svd = svd_of(w);
  SingularSummary s;
  s.singular_values = svd.singularValues();
  for (Eigen::Index k = 0; k < s.singular_values.size(); ++k) {
    const double sk = s.singular_values(k);
    if (sk > kRankTolerance) {
      s.log_sum += std::log(sk + kSingularOffset);
      ++s.rank;
    }
  }
  if (s.rank == 0) throw NumericError("zero matrix has no positive singular values");
  s.geo_mean = std::exp(s.log_sum / static_cast<double>(s.rank));
  return s;
}

RegularizerValue regularizer(const MlpParams& params, bool with_gradient) {
  params.validate();
  const std::size_t L = params.num_layers();
  RegularizerValue out;
  if (with_gradient) out.gradient = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(params.num_params()));

  // One SVD per layer gives both the spectral norm (box) and D_l.
  std::vector<Eigen::BDCSVD<Eigen::MatrixXd>> svds;
  svds.reserve(L);
  std::vector<double> input_bound(L), half_width(L), spec(L);
  double m = 1.0;
  for (std::size_t l = 0; l < L; ++l) {
    const auto& layer = params.layers[l];
    svds.push_back(svd_of(layer.weight));
    spec[l] = svds[l].singularValues()(0);
    if (spec[l] == 0.0) throw NumericError("regularizer: layer " + std::to_string(l) + " is zero");
    const double bias_inf = layer.bias.size() > 0 ? layer.bias.cwiseAbs().maxCoeff() : 0.0;
    input_bound[l] = m;
    half_width[l] = spec[l] * m + bias_inf;
    m = layer.activation == Activation::None ? half_width[l] : 1.0;
  }

  std::vector<double> grad_a(L, 0.0);
  for (std::size_t l = 0; l < L; ++l) {
    const auto& layer = params.layers[l];
    const auto& svd = svds[l];
    RegularizerTerm t;
    const std::size_t d = static_cast<std::size_t>(layer.weight.rows());
    t.log_a = log_koopman_factor(layer.activation, half_width[l], d);
    t.a_tilde = a_tilde_from_log(t.log_a);

    const Eigen::VectorXd& sv = svd.singularValues();
    double log_sum = 0.0;
    std::size_t rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
      if (sv(k) > kRankTolerance) {
        log_sum += std::log(sv(k) + kSingularOffset);
        ++rank;
      }
    }
    if (rank == 0) throw NumericError("regularizer: rank-zero layer");
    const double log_d = log_sum / static_cast<double>(rank);
    t.geo_mean = std::exp(log_d);
    t.value = kRegularizerWeight * t.a_tilde * std::exp(-0.5 * log_d);
    out.value += t.value;

    if (with_gradient) {
      // d(term)/d(log A) and d(term)/d(log D).
      const double dlog_a = t.value * (1.0 - t.a_tilde);
      const double dlog_d = -0.5 * t.value;
      grad_a[l] += dlog_a * static_cast<double>(d) * log_factor_slope(layer.activation, half_width[l]);

      // d log D / dW = (1/R) sum_k u_k v_k^T / (s_k + offset)
      Eigen::VectorXd coeff = Eigen::VectorXd::Zero(sv.size());
      for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (sv(k) > kRankTolerance) coeff(k) = dlog_d / (static_cast<double>(rank) * (sv(k) + kSingularOffset));
      }
      const Eigen::MatrixXd gw = svd.matrixU() * coeff.asDiagonal() * svd.matrixV().transpose();
      const std::size_t off = params.flat_offset(l);
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> gmap(
          out.gradient.data() + off, layer.weight.rows(), layer.weight.cols());
      gmap += gw;
    }
    out.terms.push_back(t);
  }

  if (with_gradient) {
    // a_l = ||W_l|| m_{l-1} + ||b_l||_inf, where m_{l-1} = a_{l-1} when the
    // previous layer has no activation.
    for (std::size_t li = L; li-- > 0;) {
      const double ga = grad_a[li];
      if (ga == 0.0) continue;
      const auto& layer = params.layers[li];
      const auto& svd = svds[li];
      const std::size_t off = params.flat_offset(li);
      const Eigen::Index rows = layer.weight.rows();
      const Eigen::Index cols = layer.weight.cols();
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> gmap(
          out.gradient.data() + off, rows, cols);
      gmap += (ga * input_bound[li]) * svd.matrixU().col(0) * svd.matrixV().col(0).transpose();
      if (layer.bias.size() > 0) {
        Eigen::Index k = 0;
        const double bmax = layer.bias.cwiseAbs().maxCoeff(&k);
        if (bmax > 0.0) {
          out.gradient(static_cast<Eigen::Index>(off) + rows * cols + k) += ga * (layer.bias(k) > 0 ? 1.0 : -1.0);
        }
      }
      if (li > 0 && params.layers[li - 1].activation == Activation::None) grad_a[li - 1] += ga * spec[li];
    }
  }
  return out;
}

}  // namespace kpinn
