#include <cmath>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "kpinn/autodiff/fd_check.hpp"
#include "kpinn/autodiff/grad_tape.hpp"
#include "kpinn/autodiff/jets.hpp"
#include "kpinn/core/error.hpp"

using namespace kpinn;
using kpinn::testing::random_net;
using kpinn::testing::random_points;
using kpinn::testing::single_point;

TEST(Jets, IdentityNetworkJacobian) {
  MlpParams p;
  p.layers.push_back({Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3), Activation::None});
  const Tensor x = random_points(4, 3, 1, -1.0, 1.0);
  const JetBatch j = propagate_jets(p, x, 1);
  for (std::size_t b = 0; b < 4; ++b) {
    for (std::size_t o = 0; o < 3; ++o) {
      EXPECT_DOUBLE_EQ(j.value(b, o), x(b, o));
      for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(j.jacobian(b, o, i), o == i ? 1.0 : 0.0);
    }
  }
}

TEST(Jets, ScalarTanhAgainstClosedFormAndFd) {
  const double w = 1.7;
  MlpParams p;
  p.layers.push_back({Eigen::MatrixXd::Constant(1, 1, w), Eigen::VectorXd::Zero(1), Activation::Tanh});
  for (double x : {-0.8, 0.1, 0.6}) {
    const JetBatch j = propagate_jets(p, single_point({x}), 2);
    const double t = std::tanh(w * x);
    EXPECT_NEAR(j.jacobian(0, 0, 0), w * (1 - t * t), 1e-14);
    EXPECT_NEAR(j.hessian(0, 0, 0, 0), -2 * w * w * t * (1 - t * t), 1e-13);
    const double h = 1e-5;
    const double fd = (std::tanh(w * (x + h)) - std::tanh(w * (x - h))) / (2 * h);
    EXPECT_NEAR(j.jacobian(0, 0, 0), fd, 1e-6 * std::abs(fd));
  }
}

TEST(Jets, HessianSymmetryExact) {
  for (Activation act : {Activation::Tanh, Activation::Sigmoid}) {
    const MlpParams p = random_net({3, 6, 5, 2}, act, 11);
    const JetBatch j = propagate_jets(p, random_points(7, 3, 2, -1.0, 1.0), 2);
    for (std::size_t b = 0; b < 7; ++b)
      for (std::size_t o = 0; o < 2; ++o)
        for (std::size_t i = 0; i < 3; ++i)
          for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(j.hessian(b, o, i, k), j.hessian(b, o, k, i));
  }
}

TEST(Jets, InputJetsMatchFiniteDifferences) {
  const MlpParams p = random_net({2, 5, 5, 3}, Activation::Tanh, 4);
  const InputNormalizer norm = InputNormalizer::unit_box(2);
  const Tensor x = single_point({0.37, 0.61});
  const JetBatch j = forward(p, norm, x, 2);
  const double h = 1e-5;
  for (std::size_t i = 0; i < 2; ++i) {
    Tensor xp = x, xm = x;
    xp(0, i) += h;
    xm(0, i) -= h;
    const JetBatch jp = forward(p, norm, xp, 1), jm = forward(p, norm, xm, 1);
    for (std::size_t o = 0; o < 3; ++o) {
      EXPECT_NEAR(j.jacobian(0, o, i), (jp.value(0, o) - jm.value(0, o)) / (2 * h), 1e-8);
      for (std::size_t k = 0; k < 2; ++k) {
        EXPECT_NEAR(j.hessian(0, o, k, i), (jp.jacobian(0, o, k) - jm.jacobian(0, o, k)) / (2 * h), 1e-7);
      }
    }
  }
}

TEST(Jets, OrderControlsFields) {
  const MlpParams p = random_net({2, 4, 1}, Activation::Tanh, 1);
  const JetBatch j0 = propagate_jets(p, random_points(3, 2, 1), 0);
  EXPECT_EQ(j0.jacobian.size(), 0u);
  EXPECT_EQ(jet_width(2, 2), 6u);
  EXPECT_EQ(jet_width(3, 2), 10u);
  EXPECT_THROW(propagate_jets(p, random_points(3, 2, 1), 3), ShapeError);
}

namespace {

// Value of a loss defined on the network's jets at fixed points, plus its
// tape gradient, given a weighting of value, jacobian and hessian entries.
struct JetFunctional {
  MlpParams base;
  Tensor x;
  double wv, wj, wh;

  double eval(const MlpParams& p) const {
    const JetBatch j = propagate_jets(p, x, 2);
    double s = 0.0;
    for (std::size_t b = 0; b < j.batch(); ++b)
      for (std::size_t o = 0; o < j.out_dim(); ++o) {
        s += wv * j.value(b, o) * j.value(b, o);
        for (std::size_t i = 0; i < j.input_dim; ++i) {
          s += wj * j.jacobian(b, o, i) * j.jacobian(b, o, i);
          for (std::size_t k = 0; k < j.input_dim; ++k) s += wh * j.hessian(b, o, i, k) * j.hessian(b, o, i, k);
        }
      }
    return s;
  }

  Eigen::VectorXd grad(const MlpParams& p) const {
    JetTape tape(p, x, 2);
    const JetBatch& j = tape.jets();
    JetBatch adj = JetBatch::zeros(j.batch(), j.out_dim(), j.input_dim, 2);
    for (std::size_t b = 0; b < j.batch(); ++b)
      for (std::size_t o = 0; o < j.out_dim(); ++o) {
        adj.value(b, o) = 2 * wv * j.value(b, o);
        for (std::size_t i = 0; i < j.input_dim; ++i) {
          adj.jacobian(b, o, i) = 2 * wj * j.jacobian(b, o, i);
          for (std::size_t k = 0; k < j.input_dim; ++k) adj.hessian(b, o, i, k) = 2 * wh * j.hessian(b, o, i, k);
        }
      }
    Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.num_params()));
    tape.backward(adj, g);
    return g;
  }
};

}  // namespace

TEST(JetTape, BackwardMatchesFdForEveryJetComponent) {
  for (Activation act : {Activation::Tanh, Activation::Sigmoid}) {
    const MlpParams p = random_net({2, 4, 3, 2}, act, 21);
    for (auto [wv, wj, wh] : {std::tuple{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}) {
      JetFunctional f{p, random_points(3, 2, 5, -1.0, 1.0), wv, wj, wh};
      ScalarObjective obj{[&](const Eigen::VectorXd& t) { return f.eval(p.with_flat(t)); },
                          [&](const Eigen::VectorXd& t) { return f.grad(p.with_flat(t)); }};
      const FdCheckResult r = fd_check_detailed(obj, p.flatten(), 1e-5);
      EXPECT_LT((r.analytic - r.numeric).norm() / r.numeric.norm(), 1e-6);
    }
  }
}

TEST(GradTape, HalfSquaredNormGivesTheta) {
  const MlpParams p = random_net({2, 3, 1}, Activation::Tanh, 2);
  GradTape tape(p);
  const Eigen::VectorXd theta = p.flatten();
  tape.add_direct(theta);
  tape.terminate(0.5 * theta.squaredNorm());
  EXPECT_EQ(loss_param_grad(tape), theta);
}

TEST(GradTape, PointValueMatchesFd) {
  const MlpParams p = random_net({2, 5, 1}, Activation::Tanh, 3);
  const Tensor x0 = single_point({0.3, -0.4});
  auto value = [&](const Eigen::VectorXd& t) { return propagate_jets(p.with_flat(t), x0, 0).value(0, 0); };
  auto grad = [&](const Eigen::VectorXd& t) {
    GradTape tape(p.with_flat(t));
    const std::size_t s = tape.record(InputNormalizer(Eigen::VectorXd::Constant(2, -1.0), Eigen::VectorXd::Ones(2)), x0, 0);
    JetBatch adj = JetBatch::zeros(1, 1, 2, 0);
    adj.value(0, 0) = 1.0;
    tape.seed(s, adj);
    tape.terminate(tape.jets(s).value(0, 0));
    return loss_param_grad(tape);
  };
  const FdCheckResult r = fd_check_detailed({value, grad}, p.flatten(), 1e-5);
  EXPECT_LT(r.max_rel_error, 1e-5);
}

TEST(GradTape, SquaredInputDerivativeMatchesFd) {
  const MlpParams p = random_net({2, 6, 6, 1}, Activation::Tanh, 8);
  const Tensor x0 = single_point({0.2, 0.5});
  auto value = [&](const Eigen::VectorXd& t) {
    const double d = propagate_jets(p.with_flat(t), x0, 1).jacobian(0, 0, 0);
    return d * d;
  };
  auto grad = [&](const Eigen::VectorXd& t) {
    JetTape tape(p.with_flat(t), x0, 1);
    JetBatch adj = JetBatch::zeros(1, 1, 2, 1);
    adj.jacobian(0, 0, 0) = 2 * tape.jets().jacobian(0, 0, 0);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.num_params()));
    tape.backward(adj, g);
    return g;
  };
  const FdCheckResult r = fd_check_detailed({value, grad}, p.flatten(), 1e-5);
  EXPECT_LT((r.analytic - r.numeric).norm() / r.numeric.norm(), 1e-4);
}

TEST(GradTape, UnterminatedThrows) {
  GradTape tape(random_net({2, 3, 1}, Activation::Tanh, 2));
  EXPECT_THROW(loss_param_grad(tape), Error);
}

TEST(FdCheck, QuadraticIsExact) {
  Eigen::MatrixXd a(3, 3);
  a << 2, 1, 0, 1, 3, 1, 0, 1, 4;
  ScalarObjective f{[&](const Eigen::VectorXd& x) { return 0.5 * x.dot(a * x); },
                    [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a * x; }};
  EXPECT_LT(fd_check(f, Eigen::Vector3d(0.3, -1.2, 2.0), 1e-4), 1e-8);
}

TEST(FdCheck, ConstantGivesZero) {
  ScalarObjective f{[](const Eigen::VectorXd&) { return 4.0; },
                    [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return Eigen::VectorXd::Zero(x.size()); }};
  EXPECT_EQ(fd_check(f, Eigen::Vector2d(1, 2), 1e-4), 0.0);
}

TEST(FdCheck, RejectsBadStepAndLength) {
  ScalarObjective f{[](const Eigen::VectorXd&) { return 0.0; },
                    [](const Eigen::VectorXd&) -> Eigen::VectorXd { return Eigen::VectorXd::Zero(1); }};
  EXPECT_THROW(fd_check(f, Eigen::Vector2d(1, 2), 0.0), DomainError);
  EXPECT_THROW(fd_check(f, Eigen::Vector2d(1, 2), 1e-4), ShapeError);
}
