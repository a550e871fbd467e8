#pragma once

#include <cstdint>
#include <numbers>
#include <vector>

#include "flatcyl/parallel.hpp"
#include "flatcyl/report.hpp"
#include "flatcyl/surface.hpp"

namespace flatcyl {

// Inward vector on one of the two cylinder boundary circles. The flux measure
// is sin(psi) dtheta dpsi; the four families are side x winding direction.
struct flux_sample {
  double theta;
  double psi;     // in (0, pi)
  double cos_psi; // carried exactly: the sampler draws it uniformly
  int side;       // -1: s = -L, +1: s = +L
  int family() const { return 2 * (side > 0) + (cos_psi < 0); }
};

// Total flux of the four families: 2 sides x 2 pi x int_0^pi sin.
inline constexpr double total_flux = 8.0 * std::numbers::pi;

flux_sample flux_draw(std::uint64_t key, std::uint64_t index);
std::vector<flux_sample> sample_flux(std::uint64_t seed, std::size_t count, exec e = exec::parallel);

// R_C = n iff tan(psi~) lies in (L/((n+1)pi), L/(n pi)]; 0 above L/pi.
int winding_count(double L, double psi);
int winding_count_tan(double L, double tan_psi);

// Flux mass with R_C = n, closed form (unnormalized).
double exact_tail(double L, int n);
// Flux mass with R_C > n, closed form.
double exact_tail_beyond(double L, int n);
// Flux mass with R_C = 0.
double nonwinding_mass(double L);
double sigma_R_sq(double L, double A_total);

// Counts of R_C over samples: counts[n] for n <= n_max, counts[n_max + 1] beyond.
struct winding_histogram {
  std::vector<std::uint64_t> counts;
  std::uint64_t samples = 0;
};
winding_histogram mc_winding_histogram(double L, std::uint64_t samples, std::uint64_t seed, int n_max, exec e);

// Exact law n^3 scaling on [n_lo, n_hi], Monte Carlo agreement per bin on
// [1, mc_n_max], and mass conservation.
stat_report tail_law_report(double L, int n_lo, int n_hi, std::uint64_t mc_samples, int mc_n_max, std::uint64_t seed,
                            exec e = exec::parallel);

// Survival exponent of the neck time 2*Upsilon1 for flux-distributed entries
// with ||c| - 1| < window, fitted where the survival function lies in [s_lo, s_hi].
struct neck_tail_options {
  double window = 0.1;
  double s_lo = 1e-3;
  double s_hi = 1e-1;
  double quad_tol = 1e-10;
};
stat_report neck_tail_report(const profile_params& p, std::size_t samples, std::uint64_t seed,
                             const neck_tail_options& o = {}, exec e = exec::parallel);

}  // namespace flatcyl
