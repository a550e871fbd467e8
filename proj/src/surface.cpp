#include "flatcyl/surface.hpp"

#include <cmath>
#include <numbers>

#include "flatcyl/errors.hpp"

namespace flatcyl {

std::vector<std::string> validate(const profile_params& p) {
  if (!(p.r > 4.0)) throw config_error("profile: r must exceed 4");
  if (!(p.L > 0.0 && p.L < p.eps1() && p.eps1() < p.eps0))
    throw config_error("profile: need 0 < L < eps1 < eps0");
  if (!(p.kappa_cap > 0.0)) throw config_error("profile: kappa_cap must be positive");
  if (p.n0 < 2) throw config_error("profile: n0 must be at least 2");
  std::vector<std::string> warnings;
  if (p.r < 5.0) warnings.push_back("r < 5: the C^{1+Lip} regularity regime needs r >= 5");
  return warnings;
}

const char* to_string(geodesic_kind k) {
  switch (k) {
    case geodesic_kind::asymptotic: return "asymptotic";
    case geodesic_kind::bouncing: return "bouncing";
    case geodesic_kind::crossing: return "crossing";
  }
  return "?";
}

profile_values profile_unchecked(const profile_params& p, double s) {
  const double x = std::fabs(s) - p.L;
  if (x <= 0.0) return {1.0, 0.0, 0.0};
  const double xr2 = std::pow(x, p.r - 2.0);
  const double xr1 = xr2 * x;
  return {1.0 + xr1 * x, std::copysign(p.r * xr1, s), p.r * (p.r - 1.0) * xr2};
}

profile_values profile(const profile_params& p, double s) {
  if (!(std::fabs(s) <= p.eps0)) throw domain_error("profile: |s| > eps0");
  return profile_unchecked(p, s);
}

double curvature_unchecked(const profile_params& p, double s) {
  const auto v = profile_unchecked(p, s);
  const double q = 1.0 + v.xi_p * v.xi_p;
  return -v.xi_pp / (v.xi * q * q);
}

double curvature(const profile_params& p, double s) {
  if (!(std::fabs(s) <= p.eps0)) throw domain_error("curvature: |s| > eps0");
  return curvature_unchecked(p, s);
}

double clairaut(const profile_params& p, const unit_vector& x) {
  return profile(p, x.s).xi * std::cos(x.psi);
}

geodesic_kind classify(const profile_params& p, const unit_vector& x, double tol_c) {
  // s-velocity has the sign of sin(psi); away from C means same sign as s
  if (std::fabs(x.s) > p.L && std::sin(x.psi) * x.s > 0.0)
    throw direction_error("classify: vector points away from the cylinder");
  const double c = std::fabs(clairaut(p, x));
  if (c > 1.0 + tol_c) return geodesic_kind::bouncing;
  if (c < 1.0 - tol_c) return geodesic_kind::crossing;
  return geodesic_kind::asymptotic;
}

double xi_eps1(const profile_params& p) { return 1.0 + std::pow(p.neck_width(), p.r); }

double wrap_2pi(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(a, two_pi);
  if (r < 0.0) r += two_pi;
  return r >= two_pi ? 0.0 : r;
}

double wrap_pi(double a) {
  double r = wrap_2pi(a);
  return r > std::numbers::pi ? r - 2.0 * std::numbers::pi : r;
}

double psi_tilde(double psi) { return std::fabs(std::remainder(psi, std::numbers::pi)); }

unit_vector reverse(const unit_vector& x) { return {x.s, x.theta, wrap_pi(x.psi + std::numbers::pi)}; }

}  // namespace flatcyl
