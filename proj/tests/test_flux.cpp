#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "flatcyl/errors.hpp"
#include "flatcyl/flux.hpp"
#include "flatcyl/stats.hpp"

using namespace flatcyl;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double zeta3 = 1.2020569031595942;

// direct evaluation of 8 pi (cos atan t1 - cos atan t0) in 50-digit arithmetic
double tail_oracle(double L, int n) {
  using big = boost::multiprecision::cpp_bin_float_50;
  const big pi_b = boost::math::constants::pi<big>();
  const big k = big(L) / pi_b;
  const big t0 = k / n, t1 = k / (n + 1);
  return static_cast<double>(8 * pi_b * (cos(atan(t1)) - cos(atan(t0))));
}

}  // namespace

TEST(SampleFlux, CosineUniformAndThetaUniform) {
  const std::size_t n = 200000;
  const auto xs = sample_flux(7, n);
  std::vector<double> u, th;
  double mean_cos = 0;
  for (const auto& x : xs) {
    u.push_back(0.5 * (x.cos_psi + 1));
    th.push_back(x.theta / (2 * pi));
    mean_cos += x.cos_psi;
    EXPECT_GT(x.psi, 0.0);
    EXPECT_LT(x.psi, pi);
  }
  mean_cos /= n;
  EXPECT_LT(std::fabs(mean_cos), 3 / std::sqrt(double(n)));
  EXPECT_LE(ks_uniform01(u), ks_critical(n, 0.01));
  EXPECT_LE(ks_uniform01(th), ks_critical(n, 0.01));
}

TEST(SampleFlux, DeterministicPerIndex) {
  const auto a = sample_flux(3, 100, exec::serial);
  const auto b = sample_flux(3, 1000, exec::parallel);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].theta, b[i].theta);
    EXPECT_EQ(a[i].cos_psi, b[i].cos_psi);
    EXPECT_EQ(a[i].family(), b[i].family());
  }
  EXPECT_THROW(sample_flux(3, 0), config_error);
}

TEST(SampleFlux, FourFamiliesEquallyLikely) {
  const std::size_t n = 100000;
  std::vector<double> count(4, 0);
  for (const auto& x : sample_flux(5, n)) count[x.family()] += 1;
  for (double c : count) EXPECT_NEAR(c / n, 0.25, 3 * std::sqrt(0.25 * 0.75 / n) * 1.5);
}

TEST(WindingCount, Examples) {
  const double L = 0.5;
  EXPECT_EQ(winding_count_tan(L, L / (1.5 * pi)), 1);
  for (int n = 1; n <= 1000; ++n) EXPECT_EQ(winding_count_tan(L, L / (n * pi)), n) << n;
  EXPECT_EQ(winding_count(L, pi / 2), 0);
  EXPECT_EQ(winding_count_tan(L, 1.0001 * L / pi), 0);
  EXPECT_THROW(winding_count(L, 0.0), domain_error);
  EXPECT_THROW(winding_count(L, pi), domain_error);
}

TEST(WindingCount, NonincreasingInTan) {
  const double L = 2.0;
  int prev = winding_count_tan(L, 1e-6);
  for (double t = 1e-6; t < 10; t *= 1.0001) {
    const int n = winding_count_tan(L, t);
    EXPECT_LE(n, prev);
    prev = n;
  }
}

TEST(WindingCount, ReflectionInvariant) {
  for (double psi = 0.01; psi < pi; psi += 0.0137)
    EXPECT_EQ(winding_count(1.0, psi), winding_count(1.0, pi - psi));
}

TEST(ExactTail, MatchesDirectFormula) {
  for (double L : {0.5, 2.0})
    for (int n : {1, 2, 5, 50, 500})
      EXPECT_NEAR(exact_tail(L, n), tail_oracle(L, n), 1e-12 * tail_oracle(L, n)) << n;
}

TEST(ExactTail, CubicLawWithinTwoPercent) {
  const double L = 0.5;
  const double lim = 8 * L * L / pi;
  EXPECT_NEAR(std::pow(100.0, 3) * exact_tail(L, 100) / lim, 1.0, 0.02);
  for (int n = 100; n <= 1000; ++n) EXPECT_LE(std::fabs(std::pow(double(n), 3) * exact_tail(L, n) / lim - 1), 0.02);
  // the approach is monotone: relative error ~ 3/(2n)
  EXPECT_LT(std::fabs(std::pow(1e4, 3) * exact_tail(L, 10000) / lim - 1), 2e-4);
}

TEST(ExactTail, SummableBelowZeta3Bound) {
  const double L = 0.5;
  double s = 0;
  for (int n = 1; n <= 100000; ++n) {
    s += exact_tail(L, n);
    EXPECT_LE(exact_tail(L, n), 8 * L * L / (pi * std::pow(double(n), 3)));
  }
  EXPECT_LT(s, 8 * L * L * zeta3 / pi);
}

TEST(ExactTail, MassConservation) {
  for (double L : {0.5, 2.0}) {
    for (int N : {1, 10, 1000}) {
      double s = 0;
      for (int n = 1; n <= N; ++n) s += exact_tail(L, n);
      EXPECT_NEAR(s + exact_tail_beyond(L, N) + nonwinding_mass(L), total_flux, 1e-12 * total_flux);
    }
    EXPECT_NEAR(exact_tail_beyond(L, 0) + nonwinding_mass(L), total_flux, 1e-13);
  }
}

TEST(SigmaR, Formula) {
  EXPECT_NEAR(sigma_R_sq(0.5, 1.0), 1 / pi, 1e-16);
  EXPECT_NEAR(sigma_R_sq(2.0, 2 * total_flux), 0.5 * sigma_R_sq(2.0, total_flux), 1e-16);
  EXPECT_THROW(sigma_R_sq(1.0, 0.0), config_error);
  EXPECT_THROW(sigma_R_sq(1.0, -1.0), config_error);
  // 2 sigma^2 n^-3 vs exact_tail / A
  const double A = total_flux;
  for (int n : {100, 1000}) {
    const double ratio = exact_tail(0.5, n) / A / (2 * sigma_R_sq(0.5, A) / std::pow(double(n), 3));
    EXPECT_NEAR(ratio, 1.0, 2.0 / n);
  }
}

TEST(Histogram, MatchesExactLaw) {
  const double L = 2.0;
  const std::uint64_t N = 2000000;
  const auto h = mc_winding_histogram(L, N, 11, 50, exec::parallel);
  std::uint64_t total = 0;
  for (auto c : h.counts) total += c;
  EXPECT_EQ(total, N);
  for (int n = 1; n <= 20; ++n) {
    const double p = exact_tail(L, n) / total_flux;
    EXPECT_NEAR(double(h.counts[n]), N * p, 4 * std::sqrt(N * p * (1 - p))) << n;
  }
  const double p0 = nonwinding_mass(L) / total_flux;
  EXPECT_NEAR(double(h.counts[0]), N * p0, 4 * std::sqrt(N * p0 * (1 - p0)));
}

TEST(Histogram, SerialEqualsParallel) {
  const auto a = mc_winding_histogram(0.5, 300000, 4, 30, exec::serial);
  const auto b = mc_winding_histogram(0.5, 300000, 4, 30, exec::parallel);
  EXPECT_EQ(a.counts, b.counts);
}

TEST(TailReport, Fields) {
  const auto r = tail_law_report(0.5, 100, 1000, 100000, 20, 1);
  EXPECT_LE(r.get("max_rel_dev_n3"), 0.02);
  EXPECT_LE(r.get("conservation_error"), 1e-12);
  EXPECT_EQ(r.tab("histogram").rows.size(), 20u);
  EXPECT_GT(r.get("mc_pass_probability_under_exact_law"), 0.0);
  EXPECT_LE(r.get("mc_pass_probability_under_exact_law"), 1.0);
}

TEST(NeckTail, ExponentMatchesR5AndR6) {
  for (double r : {5.0, 6.0}) {
    profile_params p;
    p.r = r;
    const auto rep = neck_tail_report(p, 100000, 17);
    EXPECT_NEAR(rep.get("fitted_exponent"), 2 * r / (r - 2), 0.15) << r;
    EXPECT_GT(rep.get("lp_margin"), 0.0);
    const auto& t = rep.tab("survival");
    for (std::size_t i = 1; i < t.rows.size(); ++i)
      EXPECT_LE(t.number(i, "upsilon_n"), t.number(i - 1, "upsilon_n"));
  }
}

TEST(NeckTail, Errors) {
  profile_params p;
  EXPECT_THROW(neck_tail_report(p, 10, 1), config_error);
  neck_tail_options o;
  o.window = 0.9;
  EXPECT_THROW(neck_tail_report(p, 10000, 1, o), config_error);
}
