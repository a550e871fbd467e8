#pragma once

#include <cstdint>
#include <vector>

#include "flatcyl/parallel.hpp"
#include "flatcyl/report.hpp"
#include "flatcyl/surface.hpp"
#include "flatcyl/tower.hpp"

namespace flatcyl {

struct coupled_spec {
  double A_total = 8.0 * 3.14159265358979323846;  // Liouville normalization of the flux
  double alpha0 = 1.0;                             // J on crossing side 0
  double alpha_pi = -1.0;                          // J on crossing side pi
  double h_bar = 1.0;                              // mean roof per g-step
  double quad_tol = 1e-10;
  std::int64_t head = 4096;  // exact sampler atoms and tabulated neck times per family
};

// Tower with tau = 1 whose cells are excursions: crossing cells (n, side) with
// R_C = n, bouncing bands (n >= n0, side) with R_C = 0, and one block cell of
// bounded return R = 1 carrying the rest of the mass. R = R_C + R_N with
// R_N = round(2 Upsilon1) at the band's reference Clairaut value.
struct coupled_model {
  profile_params profile;
  coupled_spec spec;
  tower_model tower;
  double sigma_R2 = 0.0;  // lim n^2 mu(R_C > n)
  double I_v = 0.0;
  double sigma_J2 = 0.0;
  double R_bar = 0.0;
  double sigma_v2 = 0.0;
  double b_S = 0.0;
  double crossing_mass = 0.0, bouncing_mass = 0.0, block_mass = 0.0;
  bool neck_monotone = true;

  std::int64_t r_of(const tower_cell& c) const { return tower.families[c.family].r(c.n); }
  // exact mu(R > n)
  double tail_r(std::int64_t n) const;
  // exact mu(R = k) for k = 0..k_max
  std::vector<double> r_pmf(std::int64_t k_max) const;
};

coupled_model build_coupled(const profile_params& p, const coupled_spec& s);

// Neck return of a crossing band n (tan psi~ midpoint) and a bouncing band n (delta midpoint).
std::int64_t crossing_neck_steps(const profile_params& p, std::int64_t n, double quad_tol);
std::int64_t bouncing_neck_steps(const profile_params& p, std::int64_t n, double quad_tol);

// Finite-dimensional marginals of W_n(t) = v_{nt} / sqrt(n log n) in flow time,
// v accumulating V = J R_C per completed excursion of duration h_bar R.
struct wip_options {
  std::int64_t n = 1 << 20;
  std::vector<double> t_grid{0.25, 0.5, 1.0};
  std::size_t samples = 5000;
};
stat_report wip_test(const coupled_model& m, const wip_options& o, std::uint64_t seed, exec e = exec::parallel);

// Tail n^2 mu(R > n) from the exact law, and the autocovariance of the base
// indicator along a g-orbit against the exact renewal covariance.
struct decay_options {
  std::uint64_t orbit_len = 100'000'000;
  std::int64_t lag_lo = 8, lag_hi = 128;
  std::size_t batches = 16;
  std::vector<std::int64_t> tail_n{10, 100, 1000, 10000};
};
stat_report decay_experiments(const coupled_model& m, const decay_options& o, std::uint64_t seed);

// Exact covariance of the base indicator of a stationary renewal process with
// inter-arrival law f (f[k] = P(R = k)) and mean R_bar, lags 0..k_max.
std::vector<double> renewal_covariance(const std::vector<double>& f, double R_bar, std::int64_t k_max);

// Exact derived-constant summary of the coupled model.
stat_report coupled_summary(const coupled_model& m);

}  // namespace flatcyl
