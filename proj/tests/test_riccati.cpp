#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "flatcyl/errors.hpp"
#include "flatcyl/riccati.hpp"

using namespace flatcyl;

namespace {

constexpr double pi = std::numbers::pi;

riccati_options constant_mode(double kappa) {
  riccati_options o;
  o.model = curvature_model::constant;
  o.kappa = kappa;
  return o;
}

}  // namespace

TEST(RiccatiOracle, ClosedFormSolvesTheEquation) {
  for (double kappa : {0.25, 1.0, 4.0})
    for (double u0 : {0.0, 0.3, 1e3})
      for (double t : {0.1, 1.0, 3.0}) {
        const double h = 1e-5;
        const double du = (riccati_constant_solution(kappa, u0, t + h) - riccati_constant_solution(kappa, u0, t - h)) / (2 * h);
        const double u = riccati_constant_solution(kappa, u0, t);
        EXPECT_NEAR(du, kappa - u * u, 1e-6 * (1 + u * u));
      }
  EXPECT_DOUBLE_EQ(riccati_constant_solution(1.0, 0.7, 0.0), 0.7);
}

TEST(Riccati, ConstantCurvatureMatchesClosedForm) {
  const profile_params p;
  for (double kappa : {0.25, 1.0, 4.0})
    for (double T : {0.5, 2.0, 6.0}) {
      const auto run = riccati_at_horizon(p, {0.3, 0.0, 0.4}, T, constant_mode(kappa));
      const double want = riccati_constant_solution(kappa, 1e3, T);
      EXPECT_NEAR(run.k, want, 1e-10 * want) << kappa << " " << T;
    }
}

TEST(Riccati, ConstantCurvatureFixedPointEveryDirection) {
  const profile_params p;
  for (double kappa : {0.25, 1.0, 4.0})
    for (double s : {0.0, 1.0, 2.5, 3.7})
      for (double psi = -pi; psi < pi; psi += 0.7)
        EXPECT_NEAR(k_plus(p, {s, 0.0, psi}, constant_mode(kappa)), std::sqrt(kappa), 1e-6);
}

TEST(Riccati, FlatRegionIsHyperbolicDecay) {
  // K = 0 along the closed parallel: u(0) = 1/(T + 1/u_init)
  const profile_params p;
  riccati_options o;
  for (double T : {8.0, 100.0, 1e4}) {
    const auto run = riccati_at_horizon(p, {0.0, 1.0, 0.0}, T, o);
    EXPECT_FALSE(run.exited);
    const double want = 1.0 / (T + 1.0 / o.u_init);
    EXPECT_NEAR(run.k, want, 1e-8 * want);
  }
}

TEST(Riccati, FlatClosedGeodesicHasZeroCurvature) {
  const profile_params p;
  riccati_options o;
  const auto run = k_plus_run(p, {0.0, 2.0, 0.0}, o);
  EXPECT_LT(run.k, 2 * o.tol);
  EXPECT_FALSE(run.exited);
  EXPECT_GE(run.min_u, 0.0);
}

TEST(Riccati, ExtensionIsExactFixedPoint) {
  profile_params p;
  p.kappa_cap = 2.25;
  EXPECT_DOUBLE_EQ(k_plus(p, {p.eps0 + 0.5, 0.0, 1.0}), 1.5);
  // on the boundary with the past outside
  EXPECT_DOUBLE_EQ(k_plus(p, {p.eps0, 0.0, -1.0}), 1.5);
  EXPECT_DOUBLE_EQ(k_plus(p, {-p.eps0, 0.0, 1.0}), 1.5);
  const auto c = curvatures(p, {-p.eps0 - 0.1, 0.0, 0.3});
  EXPECT_EQ(c.where, footprint::extension);
  EXPECT_DOUBLE_EQ(c.K, -2.25);
  EXPECT_DOUBLE_EQ(c.k_plus, c.k_minus);
}

TEST(Riccati, TimeReversalIdentity) {
  const profile_params p;
  for (const unit_vector x : {unit_vector{0.5, 0.0, 0.3}, unit_vector{2.4, 1.0, -1.2}, unit_vector{-3.1, 0.0, 2.0}}) {
    EXPECT_EQ(k_minus(p, x), k_plus(p, reverse(x)));
    const auto c = curvatures(p, x);
    EXPECT_EQ(c.k_minus, k_plus(p, reverse(x)));
    EXPECT_EQ(c.k_plus, k_plus(p, x));
  }
}

TEST(Riccati, SymmetriesOfTheSurface) {
  // rotation in theta and the reflection s -> -s, psi -> -psi
  const profile_params p;
  for (const unit_vector x : {unit_vector{0.5, 0.0, 0.3}, unit_vector{2.4, 0.0, -1.2}, unit_vector{3.1, 0.0, 2.0}}) {
    const double k = k_plus(p, x);
    EXPECT_NEAR(k_plus(p, {x.s, 2.0, x.psi}), k, 1e-8);
    EXPECT_NEAR(k_plus(p, {-x.s, 0.0, -x.psi}), k, 1e-8);
  }
}

TEST(Riccati, ExitMakesHorizonIrrelevant) {
  const profile_params p;
  const unit_vector x{1.0, 0.0, 0.8};
  const auto a = riccati_at_horizon(p, x, 100.0, {});
  const auto b = riccati_at_horizon(p, x, 1000.0, {});
  ASSERT_TRUE(a.exited);
  EXPECT_EQ(a.k, b.k);
  EXPECT_EQ(a.exit_time, b.exit_time);
}

TEST(Riccati, HorizonGapsDecrease) {
  const profile_params p;
  for (const unit_vector x : {unit_vector{0.0, 0.0, 0.0}, unit_vector{0.0, 0.0, 1e-4}}) {
    double prev_gap = INFINITY, prev = riccati_at_horizon(p, x, 8.0, {}).k;
    for (double T = 16.0; T <= 4096.0; T *= 2) {
      const double k = riccati_at_horizon(p, x, T, {}).k;
      const double gap = std::fabs(k - prev);
      EXPECT_LT(gap, prev_gap) << T;
      prev_gap = gap;
      prev = k;
    }
  }
}

TEST(Riccati, TraceNonnegativeResidualAndHorizon) {
  const profile_params p;
  riccati_options o;
  for (const unit_vector x : {unit_vector{0.0, 0.0, 0.01}, unit_vector{2.2, 0.0, 0.05}, unit_vector{3.0, 0.0, 1.3}}) {
    const auto rep = riccati_trace(p, x, o);
    const auto& t = rep.tab("trace");
    ASSERT_GT(t.rows.size(), 10u);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      EXPECT_GE(t.number(i, "u"), 0.0);
      EXPECT_LE(t.number(i, "K"), 0.0);
      EXPECT_LE(t.number(i, "t"), 1e-12);
    }
    EXPECT_NEAR(t.number(t.rows.size() - 1, "u"), rep.get("k_plus"), 1e-14);
    EXPECT_LT(rep.get("horizon_gap"), o.tol);
    EXPECT_LT(rep.get("tolerance_sensitivity"), o.tol);
  }
}

TEST(Riccati, PsiTildeScalingOnTheCylinder) {
  // small angles: k+ grows linearly with the angle
  const profile_params p;
  const double k1 = k_plus(p, {0.0, 0.0, 1e-3}), k2 = k_plus(p, {0.0, 0.0, 1e-2});
  const double slope = std::log(k2 / k1) / std::log(10.0);
  EXPECT_GE(slope, (p.r - 2) / p.r);
  EXPECT_LE(slope, 1.0 + 1e-3);
}

TEST(Riccati, Errors) {
  const profile_params p;
  riccati_options o;
  o.tol = 0.0;
  EXPECT_THROW(k_plus(p, {0.0, 0.0, 0.5}, o), config_error);
  o = {};
  o.T_max = 100.0;
  EXPECT_THROW(k_plus(p, {0.0, 0.0, 0.0}, o), convergence_error);
  lemma_grid g;
  g.n_psi = 2;
  EXPECT_THROW(check_lemma_key(p, g), config_error);
  EXPECT_THROW(modulus_probe(p, {4.0, 0.0, 0.0}, {1e-3}), domain_error);
}

TEST(LemmaKey, ExtremalRatiosStableUnderRefinement) {
  const profile_params p;
  const auto rep = lemma_key_refinement(p, {});
  EXPECT_TRUE(rep.flags.empty());
  for (const char* k : {"sup_upper_ratio_fine", "inf_psi_ratio_fine", "inf_depth_ratio_fine"}) {
    EXPECT_TRUE(std::isfinite(rep.get(k))) << k;
    EXPECT_GT(rep.get(k), 0.0) << k;
  }
  EXPECT_LE(rep.get("max_change"), 0.10);
  EXPECT_GE(rep.get("psi_exponent_neck"), (p.r - 2) / p.r);
  EXPECT_LE(rep.get("psi_exponent_neck"), 1.0);
}

TEST(LemmaKey, SerialEqualsParallel) {
  const profile_params p;
  const lemma_grid g{3, 3, 1e-3, 0.1};
  const auto a = check_lemma_key(p, g, {}, exec::serial);
  const auto b = check_lemma_key(p, g, {}, exec::parallel);
  EXPECT_EQ(a.values, b.values);
  const auto& ta = a.tab("grid");
  const auto& tb = b.tab("grid");
  ASSERT_EQ(ta.rows.size(), tb.rows.size());
  for (std::size_t i = 0; i < ta.rows.size(); ++i) EXPECT_EQ(ta.number(i, "k_plus"), tb.number(i, "k_plus"));
}

TEST(Corollaries, ConstantsFiniteAndHoldEverywhere) {
  const profile_params p;
  corollary_options c;
  c.samples = 2000;
  const auto rep = check_corollaries(p, c, 3);
  EXPECT_TRUE(rep.flags.empty());
  for (const char* k : {"C_kminus_kplus", "C_K_kplus_sq", "C_K_kplus_neck", "C_K_lipschitz_neck", "C_K_modulus"}) {
    EXPECT_TRUE(std::isfinite(rep.get(k))) << k;
    EXPECT_GT(rep.get(k), 0.0) << k;
  }
  EXPECT_EQ(rep.get("violations"), 0.0);
  EXPECT_EQ(rep.get("cylinder_samples") + rep.get("neck_samples") + rep.get("extension_samples"), 2000.0);
  EXPECT_GT(rep.get("extension_samples"), 0.0);
  // the extension alone: k- = k+ = sqrt(kappa_cap), |K| = kappa_cap
  const auto& t = rep.tab("samples");
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    if (std::get<std::string>(t.rows[i][3]) == "extension") {
      EXPECT_EQ(t.number(i, "k_plus"), 1.0);
      EXPECT_EQ(t.number(i, "k_minus"), 1.0);
    } else if (std::get<std::string>(t.rows[i][3]) == "cylinder") {
      EXPECT_EQ(t.number(i, "K"), 0.0);
    }
}

TEST(ModulusProbe, ZeroPerturbationZeroDifference) {
  const profile_params p;
  const auto rep = modulus_probe(p, {2.3, 0.0, 0.4}, {0.0, 1e-6, 2e-6, 4e-6, 8e-6});
  const auto& t = rep.tab("pairs");
  ASSERT_EQ(t.rows.size(), 5u);
  EXPECT_EQ(t.number(0, "k_difference"), 0.0);
  EXPECT_EQ(t.number(0, "separation"), 0.0);
  for (std::size_t i = 2; i < t.rows.size(); ++i) EXPECT_GT(t.number(i, "separation"), t.number(i - 1, "separation"));
  EXPECT_TRUE(rep.has("fitted_exponent"));
}
