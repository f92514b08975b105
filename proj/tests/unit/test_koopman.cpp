#include <cmath>

#include <Eigen/QR>
#include <gtest/gtest.h>

#include "helpers.hpp"
#include "kpinn/autodiff/fd_check.hpp"
#include "kpinn/bound/koopman.hpp"
#include "kpinn/core/error.hpp"
#include "kpinn/verify/koopman_audit.hpp"

using namespace kpinn;
using kpinn::testing::random_net;

namespace {

MlpParams single_layer(const Eigen::MatrixXd& w, const Eigen::VectorXd& b, Activation act = Activation::Tanh) {
  MlpParams p;
  p.layers.push_back({w, b, act});
  return p;
}

// sup of 1/(1 - t^2) over t in tanh([-a, a]) on a dense grid.
double tanh_grid_sup(double a, int n = 100000) {
  double best = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double t = std::tanh(-a + 2.0 * a * k / n);
    best = std::max(best, 1.0 / (1.0 - t * t));
  }
  return best;
}

Eigen::MatrixXd random_orthogonal(int n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index k = 0; k < g.size(); ++k) g.data()[k] = rng.normal();
  return Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
}

}  // namespace

TEST(Boxes, IdentityLayer) {
  const auto boxes = propagate_boxes(single_layer(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2)));
  ASSERT_EQ(boxes.size(), 1u);
  EXPECT_NEAR(boxes[0].half_width, 1.0, 1e-14);
  EXPECT_EQ(boxes[0].intervals.size(), 2u);
}

TEST(Boxes, ScaledIdentityWithBias) {
  Eigen::Vector2d b(0.5, -0.2);
  const auto boxes = propagate_boxes(single_layer(2.0 * Eigen::MatrixXd::Identity(2, 2), b));
  EXPECT_NEAR(boxes[0].half_width, 2.5, 1e-14);
  EXPECT_NEAR(boxes[0].intervals[1].lo, -2.5, 1e-14);
  EXPECT_NEAR(boxes[0].intervals[1].magnitude(), 2.5, 1e-14);
}

TEST(Boxes, OrthogonalLayerGivesUnitBox) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto boxes = propagate_boxes(single_layer(random_orthogonal(4, s), Eigen::VectorXd::Zero(4)));
    EXPECT_NEAR(boxes[0].half_width, 1.0, 1e-12);
  }
}

TEST(Boxes, NoneLayerPassesItsBoxOn) {
  MlpParams p = single_layer(3.0 * Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2), Activation::None);
  p.layers.push_back({Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2), Activation::Tanh});
  const auto boxes = propagate_boxes(p);
  EXPECT_NEAR(boxes[1].input_bound, 3.0, 1e-14);
  EXPECT_NEAR(boxes[1].half_width, 3.0, 1e-14);
}

TEST(SpectralNorm, PowerIterationAgreesWithSvd) {
  Rng rng(2);
  Eigen::MatrixXd w(5, 3);
  for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = rng.uniform(-1, 1);
  const SpectralNorm svd = spectral_norm(w), pow = spectral_norm_power(w, 500, 1e-14);
  EXPECT_NEAR(svd.value, pow.value, 1e-9);
  EXPECT_NEAR((w * svd.v - svd.value * svd.u).norm(), 0.0, 1e-12);
  EXPECT_EQ(spectral_norm(Eigen::MatrixXd::Zero(2, 2)).value, 0.0);
}

TEST(KoopmanFactor, TanhDegenerateBox) {
  EXPECT_DOUBLE_EQ(log_koopman_factor(Activation::Tanh, 0.0, 3), 0.0);
}

TEST(KoopmanFactor, TanhAgainstGridOracle) {
  const double a = std::atanh(0.5);
  const double A = std::exp(log_koopman_factor(Activation::Tanh, a, 1));
  EXPECT_NEAR(A, 4.0 / 3.0, 1e-14);
  EXPECT_NEAR(A, tanh_grid_sup(a), 1e-9);
  EXPECT_NEAR(std::sqrt(A), 1.1547005383792515, 1e-12);
  for (double aa : {0.3, 1.0, 2.5}) EXPECT_NEAR(std::exp(log_koopman_factor(Activation::Tanh, aa, 1)), tanh_grid_sup(aa), 1e-6 * tanh_grid_sup(aa));
}

TEST(KoopmanFactor, SigmoidAtZero) {
  EXPECT_NEAR(std::exp(log_koopman_factor(Activation::Sigmoid, 0.0, 1)), 4.0, 1e-14);
  // grid oracle: 1/(s(1-s)) at the edge of the image of [-a, a]
  const double a = 1.3, s = 1.0 / (1.0 + std::exp(-a));
  EXPECT_NEAR(std::exp(log_koopman_factor(Activation::Sigmoid, a, 1)), 1.0 / (s * (1 - s)), 1e-12);
  EXPECT_DOUBLE_EQ(log_koopman_factor(Activation::None, 5.0, 3), 0.0);
}

TEST(KoopmanFactor, ProductOverCoordinates) {
  EXPECT_NEAR(log_koopman_factor(Activation::Tanh, 1.0, 2), 4.0 * std::log(std::cosh(1.0)), 1e-14);
  std::vector<Interval> box{{-1.0, 1.0}, {-0.5, 0.2}};
  EXPECT_NEAR(koopman_factor(Activation::Tanh, box), std::pow(std::cosh(1.0), 2) * std::pow(std::cosh(0.5), 2), 1e-13);
}

TEST(ATilde, Values) {
  EXPECT_DOUBLE_EQ(a_tilde(1.0), 0.5);
  EXPECT_LT(1.0 - a_tilde(1e12), 1e-11);
  EXPECT_NEAR(a_tilde(4.0 / 3.0), 4.0 / 7.0, 1e-15);
  EXPECT_NEAR(a_tilde_from_log(std::log(4.0 / 3.0)), 4.0 / 7.0, 1e-15);
  EXPECT_DOUBLE_EQ(a_tilde_from_log(1e6), 1.0);
  EXPECT_THROW(a_tilde(0.0), DomainError);
}

TEST(GeoMean, IdentityDiagonalRankOne) {
  EXPECT_NEAR(geo_mean_singular(Eigen::MatrixXd::Identity(2, 2)).geo_mean, 1.0, 2e-8);
  EXPECT_NEAR(geo_mean_singular(Eigen::Vector2d(2, 8).asDiagonal().toDenseMatrix()).geo_mean, 4.0, 1e-7);
  Eigen::Matrix2d r1;
  r1 << 1, 0, 0, 0;
  const SingularSummary s = geo_mean_singular(r1);
  EXPECT_EQ(s.rank, 1u);
  EXPECT_NEAR(s.geo_mean, 1.0, 2e-8);
  EXPECT_THROW(geo_mean_singular(Eigen::MatrixXd::Zero(2, 2)), NumericError);
}

TEST(Regularizer, SingleIdentityLayer) {
  const RegularizerValue r = regularizer(single_layer(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2)));
  const double A = std::pow(std::cosh(1.0), 4);
  ASSERT_EQ(r.terms.size(), 1u);
  EXPECT_NEAR(r.terms[0].log_a, std::log(A), 1e-13);
  EXPECT_NEAR(r.terms[0].a_tilde, 1.0 / (1.0 + 1.0 / A), 1e-14);
  EXPECT_NEAR(r.value, 0.01 * r.terms[0].a_tilde / std::sqrt(r.terms[0].geo_mean), 1e-16);
  EXPECT_NEAR(r.value, 0.01 * A / (A + 1.0), 1e-9);
}

TEST(Regularizer, ScalingWeightsRaisesATildeAndDoublesD) {
  const MlpParams p = single_layer(Eigen::Vector2d(0.5, 0.8).asDiagonal().toDenseMatrix(), Eigen::Vector2d(0.1, 0.0));
  MlpParams p2 = p;
  p2.layers[0].weight *= 2.0;
  const RegularizerValue r1 = regularizer(p), r2 = regularizer(p2);
  EXPECT_GT(r2.terms[0].a_tilde, r1.terms[0].a_tilde);
  EXPECT_NEAR(r2.terms[0].geo_mean / r1.terms[0].geo_mean, 2.0, 1e-7);
  // directional derivative along the scale
  auto term_at = [&](double s) {
    MlpParams q = p;
    q.layers[0].weight *= s;
    return regularizer(q).value;
  };
  const RegularizerValue g = regularizer(p, true);
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.num_params()));
  dir.head(4) = Eigen::Map<const Eigen::Matrix<double, 4, 1>>(Eigen::Matrix2d(p.layers[0].weight.transpose()).data());
  const double h = 1e-6;
  EXPECT_NEAR(g.gradient.dot(dir), (term_at(1 + h) - term_at(1 - h)) / (2 * h), 1e-8);
}

TEST(Regularizer, OrthogonalZeroBiasLayersAgree) {
  auto net = [](std::uint64_t s) {
    MlpParams p = single_layer(random_orthogonal(3, s), Eigen::VectorXd::Zero(3));
    p.layers.push_back({random_orthogonal(3, s + 100), Eigen::VectorXd::Zero(3), Activation::Tanh});
    return p;
  };
  const double v0 = regularizer(net(1)).value;
  for (std::uint64_t s = 2; s < 6; ++s) EXPECT_NEAR(regularizer(net(s)).value, v0, 1e-12);
}

TEST(Regularizer, GradientMatchesFd) {
  for (Activation act : {Activation::Tanh, Activation::Sigmoid}) {
    const MlpParams p = random_net({2, 5, 4, 3}, act, 13);
    ScalarObjective f{[&](const Eigen::VectorXd& t) { return regularizer(p.with_flat(t)).value; },
                      [&](const Eigen::VectorXd& t) { return regularizer(p.with_flat(t), true).gradient; }};
    const FdCheckResult r = fd_check_detailed(f, p.flatten(), 1e-6);
    EXPECT_LT((r.analytic - r.numeric).norm() / r.numeric.norm(), 1e-6);
  }
}

TEST(KoopmanAudit, EmpiricalNormBelowCoshBound) {
  for (double a : {0.5, 1.0, 2.0}) {
    const KoopmanAuditResult r = koopman_audit(Activation::Tanh, a, 100, 7);
    EXPECT_NEAR(r.bound, std::cosh(a), 1e-12);
    EXPECT_GE(r.margin, 0.0);
    EXPECT_LE(r.empirical_norm, r.bound);
    EXPECT_NEAR(r.grid_sup, r.closed_form, 1e-6 * r.closed_form);
  }
}

TEST(KoopmanAudit, DenseSupMatchesClosedForm) {
  for (double a : {0.5, 1.0, 2.0}) {
    EXPECT_NEAR(dense_inverse_jacobian_sup(Activation::Tanh, a), std::cosh(a) * std::cosh(a), 1e-6);
  }
}
