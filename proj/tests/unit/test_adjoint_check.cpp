#include <cmath>

#include <gtest/gtest.h>

#include "kpinn/core/error.hpp"
#include "kpinn/verify/adjoint_check.hpp"

using namespace kpinn;

namespace {
const DomainBox kBox = DomainBox::unit(2);
TestFunction centred(const QuadratureGrid& g) { return TestFunction::normalized({0.5, 0.5}, 4.0, g); }
}  // namespace

TEST(SmoothField, DerivativeMatchesFd) {
  const SmoothField f = SmoothField::random(2, 3, 8);
  const std::vector<double> y{0.3, 0.7};
  for (std::size_t i = 0; i < 2; ++i) {
    std::vector<double> yp = y, ym = y;
    yp[i] += 1e-6;
    ym[i] -= 1e-6;
    EXPECT_NEAR(f.derivative(y, i), (f.value(yp) - f.value(ym)) / 2e-6, 1e-7);
  }
}

TEST(AdjointIdentity, ConstantFieldBothSidesVanish) {
  const QuadratureGrid g = QuadratureGrid::uniform(kBox, 50);
  const AdjointCheckResult r = adjoint_identity_check(centred(g), {SmoothField::affine({0.0, 0.0}, 3.0)}, g);
  EXPECT_LT(r.max_discrepancy, 1e-12);
}

TEST(AdjointIdentity, AffineBelowToleranceAt50) {
  const QuadratureGrid g = QuadratureGrid::uniform(kBox, 50);
  EXPECT_LT(adjoint_identity_check(centred(g), {SmoothField::affine({0.7, -1.3}, 0.4)}, g).max_discrepancy, 1e-4);
}

// Below 50 nodes the h = 1/25 grid happens to sit closer to the identity than
// h = 1/50 (the bump's edge layer is unresolved), so refinement starts at 50.
TEST(AdjointIdentity, AtLeastSecondOrderDecayFrom50) {
  double prev = 0.0;
  for (std::size_t n : {50, 100, 200}) {
    const QuadratureGrid g = QuadratureGrid::uniform(kBox, n);
    const double d = adjoint_identity_check(centred(g), g, 10, 3).max_discrepancy;
    if (prev > 0.0) EXPECT_GT(prev / d, 4.0);
    prev = d;
  }
}

TEST(AdjointIdentity, ClippedSupportFlagged) {
  const QuadratureGrid g = QuadratureGrid::uniform(kBox, 20);
  EXPECT_THROW(adjoint_identity_check(TestFunction::normalized({0.1, 0.5}, 4.0, g), g, 2, 1), DomainError);
}

TEST(CauchySchwarz, InnerProductNeverExceedsNormProduct) {
  const QuadratureGrid g = QuadratureGrid::uniform(kBox, 40);
  std::vector<SmoothField> fs;
  for (std::uint64_t s = 0; s < 10; ++s) fs.push_back(SmoothField::random(2, 3, s));
  const double excess = cauchy_schwarz_slack(centred(g), fs, g);
  EXPECT_LE(excess, 1e-12);
  EXPECT_GE(excess, -1.0);
}
