#pragma once

#include <string>
#include <vector>

namespace flatcyl {

// Surface of revolution: flat cylinder |s| <= L, necks xi = 1 + (|s|-L)^r out to eps0.
struct profile_params {
  double r = 5.0;
  double L = 2.0;
  double eps0 = 3.75;
  double kappa_cap = 1.0;  // -K on the constant-curvature extension outside the surface
  int n0 = 10;
  double chi = 0.0;  // section half-width; bookkeeping only, 0 means 0.05*(eps0-L)

  double eps1() const { return 0.5 * (L + eps0); }
  double neck_width() const { return eps1() - L; }  // w1 = eps1 - L
  double chi_or_default() const { return chi > 0.0 ? chi : 0.05 * (eps0 - L); }
};

// Throws config_error on violated invariants; returns warnings (r < 5).
std::vector<std::string> validate(const profile_params& p);

struct unit_vector {
  double s = 0.0;
  double theta = 0.0;
  double psi = 0.0;
};

enum class geodesic_kind { asymptotic, bouncing, crossing };
const char* to_string(geodesic_kind k);

struct profile_values {
  double xi;
  double xi_p;
  double xi_pp;
};

profile_values profile(const profile_params& p, double s);
double curvature(const profile_params& p, double s);
double clairaut(const profile_params& p, const unit_vector& x);
geodesic_kind classify(const profile_params& p, const unit_vector& x, double tol_c = 1e-12);

// Unchecked variants for integrators whose stages may probe just past eps0.
profile_values profile_unchecked(const profile_params& p, double s);
double curvature_unchecked(const profile_params& p, double s);

// xi at the transition section |s| = eps1.
double xi_eps1(const profile_params& p);

// Angle to the nearest of {0, pi}; the |psi| of the curvature bounds.
double psi_tilde(double psi);
double wrap_2pi(double a);
double wrap_pi(double a);  // into (-pi, pi]
unit_vector reverse(const unit_vector& x);

}  // namespace flatcyl
