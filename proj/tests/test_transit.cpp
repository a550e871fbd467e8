#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "flatcyl/errors.hpp"
#include "flatcyl/rng.hpp"
#include "flatcyl/transit.hpp"

using namespace flatcyl;

namespace {

constexpr double pi = std::numbers::pi;
const profile_params P{};

double angle_diff(double a, double b) { return std::remainder(a - b, 2 * pi); }

}  // namespace

TEST(Integrate, FlatRegionClosedForm) {
  const unit_vector x{-P.L + 0.1, 0.0, pi / 4};
  const auto tr = integrate(P, x, 1.0, 1e-12);
  ASSERT_FALSE(tr.exited);
  for (const auto& st : tr.states) {
    EXPECT_NEAR(st.s, x.s + st.t * std::sqrt(0.5), 1e-12);
    EXPECT_NEAR(st.theta, st.t * std::sqrt(0.5), 1e-12);
    EXPECT_NEAR(st.psi, pi / 4, 1e-12);
  }
  EXPECT_NEAR(tr.states.back().t, 1.0, 1e-15);
}

TEST(Integrate, MeridianKeepsTheta) {
  const auto tr = integrate(P, {-3.0, 0.7, pi / 2}, 100.0, 1e-12);
  EXPECT_TRUE(tr.exited);
  for (const auto& st : tr.states) EXPECT_NEAR(st.theta, 0.7, 1e-13);
  EXPECT_NEAR(std::fabs(tr.states.back().s), P.eps0, 1e-12);
}

TEST(Integrate, UnitSpeedAndClairaut) {
  auto key = stream_key(11, tag::clairaut, 0);
  for (int i = 0; i < 2000; ++i) {
    const unit_vector x{P.eps0 * (2 * hashed_uniform(key, 3 * i) - 1), 2 * pi * hashed_uniform(key, 3 * i + 1),
                        2 * pi * hashed_uniform(key, 3 * i + 2) - pi};
    const auto tr = integrate(P, x, 1e3, 1e-12);
    EXPECT_LE(tr.max_clairaut_drift, 1e-12);
    for (std::size_t k = 1; k < tr.states.size(); ++k) {
      const auto& st = tr.states[k];
      const auto v = profile_unchecked(P, st.s);
      const auto d = geodesic_rhs(P, {st.s, st.theta, st.psi});
      EXPECT_NEAR((1 + v.xi_p * v.xi_p) * d[0] * d[0] + v.xi * v.xi * d[1] * d[1], 1.0, 1e-11);
    }
  }
}

TEST(Integrate, ExitReported) {
  const auto tr = integrate(P, {P.eps0 - 0.01, 0.0, 1.0}, 100.0, 1e-12);
  EXPECT_TRUE(tr.exited);
  EXPECT_NEAR(tr.states.back().s, P.eps0, 1e-12);
  EXPECT_GT(tr.exit_time, 0.0);
  EXPECT_THROW(integrate(P, {P.eps0 + 0.1, 0, 0}, 1, 1e-12), domain_error);
}

TEST(TurningPoint, Examples) {
  EXPECT_DOUBLE_EQ(turning_point(P, 1.0), P.L);
  EXPECT_NEAR(turning_point(P, 1.0 + 1e-5), P.L + 0.1, 1e-11);
  EXPECT_NEAR(turning_point(P, -(1.0 + 1e-5)), P.L + 0.1, 1e-11);
  EXPECT_THROW(turning_point(P, 0.9), kind_error);
  EXPECT_THROW(turning_point(P, 1.0 + std::pow(P.neck_width() + 0.1, P.r)), window_error);
}

TEST(Zeta, ZeroAtMeridian) { EXPECT_EQ(zeta_deflection(P, 0.0, 1e-10), 0.0); }

TEST(Zeta, SmallCExpansion) {
  // zeta/c -> 2 int_0^eps1 sqrt(1+xi'^2)/xi^2 ds, reference by tanh-sinh
  boost::math::quadrature::tanh_sinh<double> ts;
  const double neck = ts.integrate(
      [](double x) {
        const double xi = 1 + std::pow(x, P.r), d = P.r * std::pow(x, P.r - 1);
        return std::sqrt(1 + d * d) / (xi * xi);
      },
      0.0, P.neck_width());
  const double limit = 2 * (P.L + neck);
  const double c = 1e-4;
  EXPECT_NEAR(zeta_deflection(P, c, 1e-12) / c, limit, 1e-7 * limit);
}

TEST(Zeta, BouncingTwoRoutesAgree) {
  for (double delta : {0.3, 0.05, 1e-3, 1e-5, 1e-7}) {
    const double z1 = excursion_of(P, {geodesic_kind::bouncing, delta}, 1e-11).zeta;
    const double z2 = zeta_bouncing_hyperbolic(P, delta, 1e-11);
    EXPECT_NEAR(z1, z2, 1e-10 * z1) << delta;
  }
}

TEST(Zeta, AgreesWithOde) {
  for (double delta : {0.5, 0.05, 0.011, 1e-3, 4e-4}) {
    for (auto kind : {geodesic_kind::crossing, geodesic_kind::bouncing}) {
      for (int side : {1, -1}) {
        const auto x = entry_vector(P, {kind, delta}, side);
        const auto tr = transition(P, x);
        const auto ode = transition_by_ode(P, x, 1e-11);
        EXPECT_NEAR(tr.deflection, ode.theta_advance, 1e-7) << delta;
        EXPECT_NEAR(2 * tr.upsilon0, ode.time, 1e-7) << delta;
        EXPECT_NEAR(tr.exit.s, ode.exit.s, 1e-10);
        EXPECT_NEAR(angle_diff(tr.exit.psi, ode.exit.psi), 0.0, 1e-8);
      }
    }
  }
}

TEST(Zeta, DerivativesMatchFiniteDifferences) {
  auto zeta_at = [](double psi) { return zeta_deflection(P, xi_eps1(P) * std::cos(psi), 1e-11); };
  for (double delta : {0.2, 0.02, 2e-3}) {
    for (auto kind : {geodesic_kind::crossing, geodesic_kind::bouncing}) {
      const auto x = entry_vector(P, {kind, delta}, 1);
      const double h = 1e-4 * delta;
      const auto d = zeta_derivatives(P, x.psi, 1e-11);
      const double fd1 = (zeta_at(x.psi + h) - zeta_at(x.psi - h)) / (2 * h);
      EXPECT_NEAR(d.zeta_p, fd1, 1e-4 * std::fabs(d.zeta_p)) << delta;
      const double fd2 =
          (zeta_derivatives(P, x.psi + h, 1e-11).zeta_p - zeta_derivatives(P, x.psi - h, 1e-11).zeta_p) / (2 * h);
      EXPECT_NEAR(d.zeta_pp, fd2, 1e-4 * std::fabs(d.zeta_pp)) << delta;
    }
  }
}

TEST(Zeta, CrossingDerivativeNegative) {
  for (double delta : {0.3, 0.01, 1e-4}) {
    const auto x = entry_vector(P, {geodesic_kind::crossing, delta}, 1);
    EXPECT_LT(zeta_derivatives(P, x.psi, 1e-10).zeta_p, 0.0);
  }
}

TEST(Zeta, NonConvergenceReported) {
  EXPECT_THROW(integrate_gk([](double x) { return std::sin(1 / x) / x; }, 0.0, 1.0, 1e-14, "wild", 4),
               quadrature_error);
}

TEST(Transition, MeridianExample) {
  const unit_vector x{-P.eps1(), 0.4, pi / 2};
  const auto tr = transition(P, x);
  EXPECT_EQ(tr.kind, geodesic_kind::crossing);
  // cos(pi/2) is 6e-17, not 0
  EXPECT_NEAR(tr.zeta, 0.0, 1e-14);
  EXPECT_NEAR(tr.upsilon2, P.L, 1e-14);
  EXPECT_DOUBLE_EQ(tr.exit.s, P.eps1());
  EXPECT_NEAR(tr.exit.theta, 0.4, 1e-14);
  EXPECT_DOUBLE_EQ(tr.exit.psi, pi / 2);
}

TEST(Transition, BouncingExit) {
  const auto x = entry_vector(P, {geodesic_kind::bouncing, 0.01}, 1);
  const auto tr = transition(P, x);
  EXPECT_EQ(tr.kind, geodesic_kind::bouncing);
  EXPECT_EQ(tr.exit.s, x.s);
  EXPECT_DOUBLE_EQ(tr.exit.psi, -x.psi);
  EXPECT_EQ(tr.upsilon2, 0.0);
  ASSERT_TRUE(tr.turning_s.has_value());
  EXPECT_NEAR(*tr.turning_s, -(P.L + std::pow(0.01, 1 / P.r)), 1e-14);
  EXPECT_DOUBLE_EQ(tr.upsilon0, tr.upsilon1 + tr.upsilon2);
}

TEST(Transition, CylinderTimeGrowsLinearly) {
  for (int n : {100, 1000, 10000}) {
    const double delta = 1.0 / (double(n) * n);
    const auto e = excursion_of(P, {geodesic_kind::crossing, delta}, 1e-10);
    EXPECT_NEAR(e.upsilon2 / (P.L / std::sqrt(2.0) * n), 1.0, 1.0 / n);
  }
}

TEST(Transition, Errors) {
  EXPECT_THROW(transition(P, {0.0, 0, 1.0}), domain_error);
  EXPECT_THROW(transition(P, {-P.eps1(), 0, -1.0}), direction_error);
  EXPECT_THROW(transition(P, {-P.eps1(), 0, std::acos(1 / xi_eps1(P))}), kind_error);
}

TEST(Transition, TimeReversal) {
  for (double delta : {0.4, 0.01, 1e-4}) {
    for (auto kind : {geodesic_kind::crossing, geodesic_kind::bouncing}) {
      for (int side : {1, -1}) {
        const auto x = entry_vector(P, {kind, delta}, side);
        const auto tr = transition(P, x, 1e-11);
        const auto back = transition(P, reverse(tr.exit), 1e-11).exit;
        const auto rx = reverse(x);
        EXPECT_NEAR(back.s, rx.s, 1e-15);
        // quadrature is adaptive, so the two integrals agree to quad_tol only
        EXPECT_NEAR(angle_diff(back.theta, rx.theta), 0.0, 1e-10 * std::fabs(tr.zeta));
        EXPECT_NEAR(angle_diff(back.psi, rx.psi), 0.0, 1e-12);
      }
    }
  }
}

TEST(Transition, MonotoneInOffset) {
  for (auto kind : {geodesic_kind::crossing, geodesic_kind::bouncing}) {
    double prev_t = 1e300, prev_z = 1e300;
    for (double delta = 0.5; delta > 1e-8; delta *= 0.7) {
      const auto e = excursion_of(P, {kind, delta}, 1e-10);
      (void)prev_t;
      const double t = e.upsilon1 + e.upsilon2;
      if (prev_z < 1e300) {
        EXPECT_GT(t, prev_t) << delta;
        EXPECT_GT(e.zeta, prev_z) << delta;
      }
      prev_t = t;
      prev_z = e.zeta;
    }
  }
}

TEST(Bands, Examples) {
  const int n = 20;
  const double mid_b = 1 + (1.0 / (n * n) + 1.0 / ((n + 1) * (n + 1))) / 2;
  auto b = band_of_c(P, mid_b);
  ASSERT_TRUE(b.has_value());
  EXPECT_EQ(b->n, n);
  EXPECT_EQ(b->kind, geodesic_kind::bouncing);
  EXPECT_EQ(b->side, 1);
  auto bc = band_of_c(P, -(1 - (1.0 / (n * n) + 1.0 / ((n + 1) * (n + 1))) / 2));
  ASSERT_TRUE(bc.has_value());
  EXPECT_EQ(bc->n, n);
  EXPECT_EQ(bc->kind, geodesic_kind::crossing);
  EXPECT_EQ(bc->side, -1);
  EXPECT_FALSE(band_of_c(P, 1.0 - 1.0 / (P.n0 * P.n0)).has_value());
  EXPECT_FALSE(band_of_c(P, 0.5).has_value());
  EXPECT_FALSE(band_of_c(P, 1.0).has_value());
}

TEST(Bands, ExitAngleSpreadConstant) {
  // within one band the entry (hence exit) angle spans ~ 2 (a^2-1)^{-1/2} n^-3
  const double a = xi_eps1(P);
  const double coeff = 2.0 / std::sqrt(a * a - 1.0);
  double prev = 1e300;
  for (int n : {10, 100, 1000}) {
    const auto [lo, hi] = band_delta_range(n);
    const double width = std::fabs(std::acos((1 - hi) / a) - std::acos((1 - lo) / a));
    const double err = std::fabs(width * n * n * n / coeff - 1.0);
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 0.01);
}

TEST(Scaling, CylinderTimeSlope) {
  const auto rep = scaling_report(P, band_quantity::upsilon2, geodesic_kind::crossing, 10, 1000, 5, 3, 1e-10);
  EXPECT_NEAR(rep.get("slope"), 1.0, 0.05);
  EXPECT_THROW(scaling_report(P, band_quantity::upsilon2, geodesic_kind::crossing, 10, 1000, 5, 2, 1e-10),
               config_error);
  EXPECT_THROW(scaling_report(P, band_quantity::upsilon1, geodesic_kind::crossing, 10, 11, 5, 3, 1e-10), error);
}

TEST(Scaling, SerialAndParallelIdentical) {
  const auto a = scaling_report(P, band_quantity::zeta_prime, geodesic_kind::bouncing, 10, 200, 4, 3, 1e-10, exec::serial);
  const auto b =
      scaling_report(P, band_quantity::zeta_prime, geodesic_kind::bouncing, 10, 200, 4, 3, 1e-10, exec::parallel);
  EXPECT_EQ(to_csv(a.tab("bands")), to_csv(b.tab("bands")));
}

TEST(Distortion, BoundedAcrossBands) {
  std::vector<double> sups;
  for (int n : {10, 30, 100}) {
    const auto rep = distortion_check(P, {n, geodesic_kind::crossing, 1}, 20, 5);
    sups.push_back(rep.get("sup_distortion_ratio"));
    EXPECT_TRUE(std::isfinite(rep.get("sup_time_ratio")));
  }
  const double hi = *std::max_element(sups.begin(), sups.end());
  EXPECT_TRUE(std::isfinite(hi));
  EXPECT_LT(hi, 10.0);
}
