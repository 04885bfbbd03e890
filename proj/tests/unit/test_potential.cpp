#include "flexform/potential.hpp"

#include "oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace flexform;

TEST(Potential, QuadraticValues) {
  const auto q = PotentialFamily::quadratic();
  EXPECT_DOUBLE_EQ(q.phi(3.0, 4.0), 4.5);
  EXPECT_EQ(q.phi(0.0, 4.0), 0.0);
  EXPECT_DOUBLE_EQ(q.g(-16.0, 4.0), -16.0);
  EXPECT_DOUBLE_EQ(q.rho(5.0, 4.0), 1.0);
  EXPECT_TRUE(q.in_domain(-16.0, 4.0));
}

TEST(Potential, RationalValues) {
  const auto r = PotentialFamily::rational();
  EXPECT_DOUBLE_EQ(r.phi(16.0, 4.0), 8.0);
  EXPECT_EQ(r.phi(0.0, 4.0), 0.0);
  EXPECT_EQ(r.g(0.0, 4.0), 0.0);
  // g = 1 - d^4/(e+d^2)^2 at e = 16: 1 - 256/1024.
  EXPECT_DOUBLE_EQ(r.g(16.0, 4.0), 0.75);
  EXPECT_DOUBLE_EQ(r.rho(0.0, 4.0), 2.0 / 16.0);
}

TEST(Potential, RationalRejectsCoincidence) {
  const auto r = PotentialFamily::rational();
  EXPECT_FALSE(r.in_domain(-16.0, 4.0));
  EXPECT_FALSE(r.in_domain(-20.0, 4.0));
  EXPECT_THROW((void)r.g(-16.0, 4.0), PotentialDomainError);
  EXPECT_THROW((void)r.phi(-17.0, 4.0), PotentialDomainError);
}

TEST(Potential, FromTag) {
  EXPECT_EQ(PotentialFamily::from_tag("quadratic").kind(), PotentialKind::Quadratic);
  EXPECT_EQ(PotentialFamily::from_tag("rational").kind(), PotentialKind::Rational);
  EXPECT_THROW(PotentialFamily::from_tag("cubic"), std::invalid_argument);
}

class FamilyProperty : public ::testing::TestWithParam<std::string> {
 protected:
  PotentialFamily family() const {
    if (GetParam() == "quartic") return oracle::quartic();
    return PotentialFamily::from_tag(GetParam());
  }
};

TEST_P(FamilyProperty, SignAgreement) {
  const auto f = family();
  for (double d : {0.5, 1.0, 4.0, 7.0}) {
    for (double e : sample_grid(d, 5 * d * d, 801)) {
      const double g = f.g(e, d);
      if (e == 0.0) {
        EXPECT_EQ(g, 0.0);
      } else {
        EXPECT_GT(g * e, 0.0) << "e=" << e << " d=" << d;
      }
    }
  }
}

TEST_P(FamilyProperty, FiniteDifferencesConvergeAtSecondOrder) {
  const auto f = family();
  const double d = 4.0;
  for (double e : {-10.0, -3.0, -0.5, 0.7, 4.0, 20.0}) {
    auto err = [&](double h) {
      const double dg = std::abs(f.g(e, d) - (f.phi(e + h, d) - f.phi(e - h, d)) / (2 * h));
      const double dr = std::abs(f.rho(e, d) - (f.g(e + h, d) - f.g(e - h, d)) / (2 * h));
      return std::max(dg, dr);
    };
    const double e1 = err(1e-2), e2 = err(5e-3);
    if (e1 > 1e-10) {
      EXPECT_LT(e2, 0.3 * e1) << "e=" << e;  // ratio 1/4 expected
    }
    EXPECT_LT(err(1e-4), 1e-6) << "e=" << e;
  }
}

TEST_P(FamilyProperty, PassesAssumptionCheck) {
  const auto f = family();
  EXPECT_TRUE(validate_assumption1(f, 4.0, sample_grid(4.0, 100.0, 4001)).empty());
}

INSTANTIATE_TEST_SUITE_P(Families, FamilyProperty, ::testing::Values("quadratic", "rational", "quartic"));

TEST(Assumption, GridOverSpecRange) {
  // Grid over (-15.9, 100] for dbar = 4.
  const auto grid = sample_grid(4.0, 100.0, 2001);
  EXPECT_NEAR(grid.front(), -15.9, 1e-12);
  EXPECT_DOUBLE_EQ(grid.back(), 100.0);
  EXPECT_NE(std::find(grid.begin(), grid.end(), 0.0), grid.end());
  EXPECT_TRUE(validate_assumption1(PotentialFamily::quadratic(), 4.0, grid).empty());
  EXPECT_TRUE(validate_assumption1(PotentialFamily::rational(), 4.0, grid).empty());
}

TEST(Assumption, CubicGradientFailsCurvature) {
  const auto bad = PotentialFamily::custom(
      "cubic", [](double e, double) { return std::pow(e, 4) / 4; },
      [](double e, double) { return e * e * e; }, [](double e, double) { return 3 * e * e; }, true);
  const auto v = validate_assumption1(bad, 4.0, sample_grid(4.0, 100.0, 2001));
  ASSERT_FALSE(v.empty());
  bool curvature_at_zero = false;
  for (const auto& x : v) {
    if (x.check == AssumptionCheck::CurvaturePositive && x.e == 0.0) curvature_at_zero = true;
  }
  EXPECT_TRUE(curvature_at_zero);
}

TEST(Assumption, WrongSignFamilyFails) {
  const auto bad = PotentialFamily::custom(
      "flipped", [](double e, double) { return -0.5 * e * e; }, [](double e, double) { return -e; },
      [](double, double) { return -1.0; }, true);
  const auto v = validate_assumption1(bad, 1.0, sample_grid(1.0, 4.0, 101));
  EXPECT_FALSE(v.empty());
}
