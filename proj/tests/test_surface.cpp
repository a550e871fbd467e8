#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <boost/math/differentiation/autodiff.hpp>

#include "flatcyl/errors.hpp"
#include "flatcyl/surface.hpp"

using namespace flatcyl;

namespace {

profile_params narrow() {
  profile_params p;
  p.r = 5.0;
  p.L = 0.5;
  p.eps0 = 1.0;
  return p;
}

// curvature of a surface of revolution from autodiff derivatives of the profile
double curvature_autodiff(const profile_params& p, double s) {
  using namespace boost::math::differentiation;
  if (std::fabs(s) <= p.L) return 0.0;  // xi is constant there
  auto x = make_fvar<double, 2>(s);
  auto xi = 1.0 + pow(fabs(x) - p.L, p.r);
  const double d1 = xi.derivative(1), d2 = xi.derivative(2), v = xi.derivative(0);
  return -d2 / (v * (1 + d1 * d1) * (1 + d1 * d1));
}

}  // namespace

TEST(Profile, FlatCylinder) {
  const auto v = profile(narrow(), 0.0);
  EXPECT_EQ(v.xi, 1.0);
  EXPECT_EQ(v.xi_p, 0.0);
  EXPECT_EQ(v.xi_pp, 0.0);
}

TEST(Profile, NeckValue) {
  const auto p = narrow();
  EXPECT_NEAR(profile(p, p.L + 0.1).xi, 1.0 + 1e-5, 1e-15);
  EXPECT_NEAR(profile(p, -(p.L + 0.1)).xi, 1.0 + 1e-5, 1e-15);
  EXPECT_LT(profile(p, -(p.L + 0.1)).xi_p, 0.0);
}

TEST(Profile, SecondDerivativeContinuousAtL) {
  const auto p = narrow();
  EXPECT_EQ(profile(p, p.L).xi_pp, 0.0);
  EXPECT_NEAR(profile(p, std::nextafter(p.L, 2.0)).xi_pp, 0.0, 1e-30);
  EXPECT_NEAR(profile(p, p.L + 1e-6).xi_pp, 0.0, 1e-15);
}

TEST(Profile, DomainError) {
  const auto p = narrow();
  EXPECT_THROW(profile(p, 1.0001), domain_error);
  EXPECT_THROW(curvature(p, -1.5), domain_error);
  EXPECT_NO_THROW(profile(p, 1.0));
}

TEST(Curvature, ZeroOnCylinderNegativeOnNeck) {
  const auto p = narrow();
  for (double s = -p.L; s <= p.L; s += 0.01) EXPECT_EQ(curvature(p, s), 0.0);
  for (double s = p.L + 1e-3; s <= p.eps0; s += 0.01) {
    EXPECT_LT(curvature(p, s), 0.0);
    EXPECT_LT(curvature(p, -s), 0.0);
  }
}

TEST(Curvature, ClosedFormExample) {
  const auto p = narrow();
  const double expected = -2.5 / (1.03125 * std::pow(1.0 + 0.3125 * 0.3125, 2));
  EXPECT_NEAR(curvature(p, p.L + 0.5), expected, 1e-15);
}

TEST(Curvature, MatchesAutodiffOracle) {
  for (double r : {4.5, 5.0, 6.0, 7.5}) {
    profile_params p;
    p.r = r;
    for (double s = -p.eps0; s <= p.eps0; s += 0.0137) {
      const double k = curvature(p, s);
      EXPECT_NEAR(k, curvature_autodiff(p, s), 1e-12 * std::max(1.0, std::fabs(k))) << "r=" << r << " s=" << s;
    }
  }
}

TEST(Curvature, ContinuousAcrossL) {
  const auto p = narrow();
  EXPECT_NEAR(curvature(p, p.L + 1e-4), 0.0, 1e-10);
}

TEST(Clairaut, Examples) {
  const auto p = narrow();
  EXPECT_NEAR(clairaut(p, {0.2, 1.0, std::numbers::pi / 2}), 0.0, 1e-16);
  EXPECT_EQ(clairaut(p, {0.0, 0.0, 0.0}), 1.0);
  const double a = profile(p, p.eps1()).xi;
  EXPECT_NEAR(clairaut(p, {p.eps1(), 0.0, std::acos(1.0 / a)}), 1.0, 1e-15);
}

TEST(Clairaut, BoundedByXi) {
  const auto p = narrow();
  for (double s = -p.eps0; s <= p.eps0; s += 0.05)
    for (double psi = -3.1; psi < 3.2; psi += 0.1) EXPECT_LE(std::fabs(clairaut(p, {s, 0, psi})), profile(p, s).xi);
  EXPECT_EQ(std::fabs(clairaut(p, {0.9, 0, 0})), profile(p, 0.9).xi);
}

TEST(Classify, Kinds) {
  const auto p = narrow();
  const double a = profile(p, -p.eps1()).xi;
  auto at = [&](double c) { return unit_vector{-p.eps1(), 0.0, std::acos(c / a)}; };
  EXPECT_EQ(classify(p, at(0.0)), geodesic_kind::crossing);
  EXPECT_EQ(classify(p, {0.0, 0.0, 0.0}), geodesic_kind::asymptotic);
  // |c| = 1.05 needs a wider neck than the narrow profile has
  profile_params w;
  w.L = 0.5;
  w.eps0 = 2.0;
  const double aw = profile(w, -w.eps1()).xi;
  EXPECT_EQ(classify(w, {-w.eps1(), 0.0, std::acos(1.05 / aw)}), geodesic_kind::bouncing);
  EXPECT_EQ(classify(w, {-w.eps1(), 0.0, std::acos(-1.05 / aw)}), geodesic_kind::bouncing);
}

TEST(Classify, DirectionError) {
  const auto p = narrow();
  EXPECT_THROW(classify(p, {-p.eps1(), 0.0, -1.0}), direction_error);
  EXPECT_THROW(classify(p, {p.eps1(), 0.0, 1.0}), direction_error);
}

TEST(Classify, Symmetries) {
  profile_params p;
  for (double c : {0.3, 0.999, 1.2, 1.4}) {
    const double a = profile(p, p.eps1()).xi;
    const double psi = std::acos(c / a);
    // left entry moving right: psi in (0, pi); psi -> pi - psi flips the sign of c
    const auto k = classify(p, {-p.eps1(), 0, psi});
    EXPECT_EQ(classify(p, {-p.eps1(), 0, std::numbers::pi - psi}), k);
    EXPECT_EQ(classify(p, {p.eps1(), 0, -psi}), k);
  }
}

TEST(Params, Validation) {
  profile_params p;
  EXPECT_TRUE(validate(p).empty());
  p.r = 4.5;
  EXPECT_EQ(validate(p).size(), 1u);
  p.r = 4.0;
  EXPECT_THROW(validate(p), config_error);
  profile_params q;
  q.L = 5.0;
  EXPECT_THROW(validate(q), config_error);
  profile_params k;
  k.kappa_cap = 0;
  EXPECT_THROW(validate(k), config_error);
  profile_params n;
  n.n0 = 1;
  EXPECT_THROW(validate(n), config_error);
}

TEST(Angles, PsiTildeAndReverse) {
  EXPECT_NEAR(psi_tilde(0.1), 0.1, 1e-15);
  EXPECT_NEAR(psi_tilde(std::numbers::pi - 0.1), 0.1, 1e-15);
  EXPECT_NEAR(psi_tilde(-std::numbers::pi + 0.1), 0.1, 1e-15);
  EXPECT_NEAR(psi_tilde(std::numbers::pi / 2), std::numbers::pi / 2, 1e-15);
  const unit_vector x{0.3, 1.0, 0.4};
  const auto y = reverse(reverse(x));
  EXPECT_NEAR(y.psi, x.psi, 1e-15);
  EXPECT_NEAR(reverse(x).psi, 0.4 - std::numbers::pi, 1e-15);
}
