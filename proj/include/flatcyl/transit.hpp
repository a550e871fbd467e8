#pragma once

#include <optional>
#include <vector>

#include "flatcyl/numerics.hpp"
#include "flatcyl/parallel.hpp"
#include "flatcyl/report.hpp"
#include "flatcyl/surface.hpp"

namespace flatcyl {

struct geodesic_state {
  double t, s, theta, psi;
};

struct trajectory {
  std::vector<geodesic_state> states;
  bool exited = false;     // reached |s| = eps0
  double exit_time = 0.0;  // time of exit, or T
  double max_clairaut_drift = 0.0;
};

// Geodesic equations in Clairaut coordinates, (s, theta, psi)' for unit speed.
vec<3> geodesic_rhs(const profile_params& p, const vec<3>& y);

trajectory integrate(const profile_params& p, const unit_vector& x, double T, double tol, bool record = true);

// |c| = 1 - delta (crossing) or 1 + delta (bouncing). Carrying delta instead of
// c keeps full precision near the asymptotic family.
struct clairaut_offset {
  geodesic_kind kind;
  double delta;
  double abs_c() const { return kind == geodesic_kind::crossing ? 1.0 - delta : 1.0 + delta; }
};
clairaut_offset offset_of(double c, double tol_c = 1e-12);

double turning_point(const profile_params& p, double c);

// One-sided neck quantities from eps1 down to L (crossing) or to the turning point.
struct excursion {
  double zeta;      // total deflection magnitude
  double upsilon1;  // neck time, one side
  double upsilon2;  // cylinder half time (0 for bouncing)
};
excursion excursion_of(const profile_params& p, const clairaut_offset& c, double quad_tol);

double zeta_deflection(const profile_params& p, double c, double quad_tol);

// d zeta/d|c| and d^2 zeta/d|c|^2.
struct zeta_c_derivs {
  double zeta, zeta_c, zeta_cc;
};
zeta_c_derivs zeta_c_derivatives(const profile_params& p, const clairaut_offset& c, double quad_tol);

// Bouncing only: zeta via the hyperbolic substitution (independent of the u^2 route).
double zeta_bouncing_hyperbolic(const profile_params& p, double delta, double quad_tol);

struct zeta_psi_derivs {
  double zeta_p, zeta_pp;
};
// Derivatives in the entry angle psi at |s| = eps1, where c = xi(eps1) cos psi.
zeta_psi_derivs zeta_derivatives(const profile_params& p, double psi, double quad_tol);
zeta_psi_derivs zeta_derivatives(const profile_params& p, const clairaut_offset& c, double quad_tol);

struct band_index {
  int n;
  geodesic_kind kind;  // bouncing '>' or crossing '<'
  int side;            // sign of c
};
std::optional<band_index> band_of(const profile_params& p, const unit_vector& x);
std::optional<band_index> band_of_c(const profile_params& p, double c);
// delta range (lo, hi) of band n
std::pair<double, double> band_delta_range(int n);

struct transition_result {
  geodesic_kind kind;
  unit_vector exit;
  double upsilon0, upsilon1, upsilon2;
  double zeta;        // magnitude
  double deflection;  // signed theta advance, sign(c) * zeta
  std::optional<band_index> band;
  std::optional<double> turning_s;
};

transition_result transition(const profile_params& p, const unit_vector& x, double quad_tol = 1e-10,
                             double tol_c = 1e-12);

// Entry vector on the left section s = -eps1 with the given |c| offset and side sign(c).
unit_vector entry_vector(const profile_params& p, const clairaut_offset& c, int side);

// ODE oracle for one excursion: theta advance and elapsed time from |s| = eps1 back to it.
struct excursion_ode {
  unit_vector exit;
  double theta_advance;
  double time;
};
excursion_ode transition_by_ode(const profile_params& p, const unit_vector& x, double tol);

enum class band_quantity { upsilon1, upsilon2, zeta_prime, zeta_double_prime };
const char* to_string(band_quantity q);

double band_value(const profile_params& p, band_quantity q, const clairaut_offset& c, double quad_tol);

// Log-log fit of the per-band geometric mean against n over n_bands log-spaced bands.
stat_report scaling_report(const profile_params& p, band_quantity q, geodesic_kind kind, int n_lo, int n_hi,
                           int n_bands, int samples_per_band, double quad_tol, exec e = exec::parallel);

stat_report distortion_check(const profile_params& p, const band_index& band, int pairs, std::uint64_t seed,
                             double quad_tol = 1e-10);

}  // namespace flatcyl
