#pragma once

#include <cstdint>
#include <vector>

#include "flatcyl/numerics.hpp"
#include "flatcyl/parallel.hpp"
#include "flatcyl/report.hpp"
#include "flatcyl/surface.hpp"

namespace flatcyl {

// surface: K from the profile inside the surface, -kappa_cap beyond it.
// constant: K = -kappa everywhere (closed-form reference mode).
enum class curvature_model { surface, constant };

struct riccati_options {
  double tol = 1e-8;       // horizon-doubling convergence |u_T(0) - u_2T(0)|
  double ode_tol = 1e-13;  // local error control of the coupled integration
  double T0 = 8.0;
  double T_max = 1e9;
  double u_init = 1e3;  // u(-T) when -T is still inside the surface
  curvature_model model = curvature_model::surface;
  double kappa = 1.0;  // constant model only
};

struct riccati_run {
  double k = 0.0;        // u(0)
  double horizon = 0.0;  // final T
  bool exited = false;   // backward geodesic left the surface: exact start u = sqrt(kappa_cap)
  double exit_time = 0.0;
  int doublings = 0;
  double min_u = 0.0;
  std::size_t steps = 0;
};

// Unstable Riccati solution u(0) along the geodesic through x.
riccati_run k_plus_run(const profile_params& p, const unit_vector& x, const riccati_options& o = {});
double k_plus(const profile_params& p, const unit_vector& x, const riccati_options& o = {});
// Stable curvature by time reversal.
double k_minus(const profile_params& p, const unit_vector& x, const riccati_options& o = {});

// u(0) for a fixed horizon with an explicit start value; exposed for the
// closed-form and horizon tests.
riccati_run riccati_at_horizon(const profile_params& p, const unit_vector& x, double T, const riccati_options& o);

// Accepted points (t <= 0, u, K) of the converged run, with the horizon gap
// |u_T(0) - u_{T/2}(0)| and the change of k+ when ode_tol drops 100-fold.
stat_report riccati_trace(const profile_params& p, const unit_vector& x, const riccati_options& o = {});

// u(t) of u' = -u^2 + kappa from u(0) = u0.
double riccati_constant_solution(double kappa, double u0, double t);

enum class footprint { cylinder, neck, extension };
const char* to_string(footprint f);

struct curvature_sample {
  unit_vector x;
  footprint where;
  double a;  // neck depth |s| - L, 0 on the cylinder
  double K;
  double k_plus, k_minus;
};
curvature_sample curvatures(const profile_params& p, const unit_vector& x, const riccati_options& o = {});

// Reference angles: n_psi log-spaced on [psi_min, psi_split] and n_psi
// evenly spaced on [psi_split, pi/2]; refined() halves every spacing.
struct lemma_grid {
  int n_s = 9;  // footprints per half (cylinder and neck each)
  int n_psi = 9;
  double psi_min = 1e-4;
  double psi_split = 0.1;
  lemma_grid refined() const { return {2 * n_s - 1, 2 * n_psi - 1, psi_min, psi_split}; }
};

// Extremal ratios of the curvature bounds over a grid, and the exponent of
// k+ against |psi| at fixed neck depth.
stat_report check_lemma_key(const profile_params& p, const lemma_grid& g, const riccati_options& o = {},
                            exec e = exec::parallel);
// The same on g and g.refined(), with relative changes of each ratio.
stat_report lemma_key_refinement(const profile_params& p, const lemma_grid& g, const riccati_options& o = {},
                                 exec e = exec::parallel);

struct corollary_options {
  std::size_t samples = 10000;
  double cylinder_fraction = 0.45;
  double neck_fraction = 0.45;  // rest on the constant-curvature extension
  double psi_min = 1e-6;
};
stat_report check_corollaries(const profile_params& p, const corollary_options& c, std::uint64_t seed,
                              const riccati_options& o = {}, exec e = exec::parallel);

// Pairs sharing u(-T) whose backward starts differ by delta in psi.
stat_report modulus_probe(const profile_params& p, const unit_vector& x, const std::vector<double>& deltas,
                          const riccati_options& o = {});

}  // namespace flatcyl
