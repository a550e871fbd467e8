#include "flatcyl/transit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flatcyl/rng.hpp"
#include "flatcyl/stats.hpp"

namespace flatcyl {

namespace {

constexpr double pi = std::numbers::pi;

double sgn(double v) { return v < 0 ? -1.0 : 1.0; }

// xi, |xi'| and sqrt(1 + xi'^2) at neck depth x = |s| - L >= 0
struct neck_point {
  double xi, g;
};
neck_point neck_at(double r, double x) {
  if (x <= 0) return {1.0, 1.0};
  const double xr1 = std::pow(x, r - 1.0);
  const double d = r * xr1;
  return {1.0 + xr1 * x, std::sqrt(1.0 + d * d)};
}

}  // namespace

vec<3> geodesic_rhs(const profile_params& p, const vec<3>& y) {
  const auto v = profile_unchecked(p, y[0]);
  const double q = std::sqrt(1.0 + v.xi_p * v.xi_p);
  const double sp = std::sin(y[2]), cp = std::cos(y[2]);
  return {sp / q, cp / v.xi, v.xi_p * cp / (v.xi * q)};
}

trajectory integrate(const profile_params& p, const unit_vector& x, double T, double tol, bool record) {
  if (!(std::fabs(x.s) <= p.eps0)) throw domain_error("integrate: start outside the surface");
  trajectory tr;
  const double c0 = clairaut(p, x);
  if (record) tr.states.push_back({0.0, x.s, x.theta, x.psi});
  // already on the boundary and leaving
  if (std::fabs(x.s) == p.eps0 && std::sin(x.psi) * x.s > 0) {
    tr.exited = true;
    return tr;
  }
  ode_options o;
  // local error control; headroom so the accumulated drift stays below tol
  o.abs_tol = o.rel_tol = 1e-2 * tol;
  auto observe = [&](double t, const vec<3>& y) {
    const double c = profile_unchecked(p, y[0]).xi * std::cos(y[2]);
    tr.max_clairaut_drift = std::max(tr.max_clairaut_drift, std::fabs(c - c0));
    if (record) tr.states.push_back({t, y[0], y[1], y[2]});
  };
  auto end = flow<3>([&](const vec<3>& y) { return geodesic_rhs(p, y); }, {x.s, x.theta, x.psi}, T, o,
                     [&](const vec<3>& y) { return std::fabs(y[0]) - p.eps0; }, observe,
                     [&](const vec<3>& y) { return std::fabs(y[0]) - p.L; });
  if (end.event) observe(end.t, end.x);
  tr.exited = end.event;
  tr.exit_time = end.t;
  return tr;
}

clairaut_offset offset_of(double c, double tol_c) {
  const double a = std::fabs(c);
  if (std::fabs(a - 1.0) <= tol_c) throw kind_error("asymptotic Clairaut constant");
  return a < 1.0 ? clairaut_offset{geodesic_kind::crossing, 1.0 - a} : clairaut_offset{geodesic_kind::bouncing, a - 1.0};
}

double turning_point(const profile_params& p, double c) {
  const double a = std::fabs(c);
  if (a < 1.0) throw kind_error("turning_point: |c| < 1 has no turning point");
  const double s0 = p.L + std::pow(a - 1.0, 1.0 / p.r);
  if (s0 > p.eps1()) throw window_error("turning_point: s0 beyond eps1");
  return s0;
}

namespace {

// Neck integrals for crossing, in the depth variable x in [0, w1].
// xi^2 - c^2 = (x^r + delta)(xi + c) with c = 1 - delta.
struct crossing_neck {
  double r, w1, delta, c;
  double split() const { return std::min(std::pow(delta, 1.0 / r), w1); }
  double q(const neck_point& n, double x) const { return (std::pow(x, r) + delta) * (n.xi + c); }
};

template <class Weight>
double crossing_integral(const crossing_neck& k, Weight&& w, double tol, const char* what) {
  auto f = [&](double x) {
    const auto n = neck_at(k.r, x);
    return w(n, k.q(n, x));
  };
  const double x1 = k.split();
  const double x2 = std::min(4.0 * x1, k.w1);
  return integrate_pieces(f, std::array<double, 4>{0.0, x1, x2, k.w1}, tol, what).value;
}

// Bouncing: x = x0 + u^2 removes the inverse square root at the turning point.
// xi^2 - c^2 = x0^r expm1(r log1p(u^2/x0)) (xi + c); the factor 2u/sqrt(.) is
// evaluated as 2/sqrt(./u^2).
template <class Weight>
double bouncing_integral(double r, double w1, double delta, Weight&& w, double tol, const char* what) {
  const double c = 1.0 + delta;
  const double x0 = std::pow(delta, 1.0 / r);
  if (x0 >= w1) throw window_error("bouncing: turning point beyond eps1");
  const double x0r = delta;  // x0^r
  auto f = [&](double u) {
    const double u2 = u * u;
    const double x = x0 + u2;
    const auto n = neck_at(r, x);
    const double ratio = u2 / x0;
    const double d_over_u2 =
        ratio > 1e-300 ? x0r * std::expm1(r * std::log1p(ratio)) / u2 : r * x0r / x0;  // -> r x0^{r-1}
    return w(n, 2.0 / std::sqrt(d_over_u2 * (n.xi + c)));
  };
  const double U = std::sqrt(w1 - x0);
  const double u1 = std::min(std::sqrt(x0), U);
  return integrate_pieces(f, std::array<double, 3>{0.0, u1, U}, tol, what).value;
}

}  // namespace

excursion excursion_of(const profile_params& p, const clairaut_offset& off, double tol) {
  const double r = p.r, w1 = p.neck_width();
  if (off.kind == geodesic_kind::crossing) {
    const double c = 1.0 - off.delta;
    const crossing_neck k{r, w1, off.delta, c};
    const double theta_neck = crossing_integral(
        k, [&](const neck_point& n, double q) { return c / n.xi * n.g / std::sqrt(q); }, tol, "zeta (crossing)");
    const double time_neck =
        crossing_integral(k, [&](const neck_point& n, double q) { return n.xi * n.g / std::sqrt(q); }, tol, "upsilon1");
    const double sin_c = std::sqrt(off.delta * (2.0 - off.delta));  // sqrt(1 - c^2)
    const double ups2 = p.L / sin_c;
    return {2.0 * (theta_neck + c * ups2), time_neck, ups2};
  }
  const double c = 1.0 + off.delta;
  const double theta_neck = bouncing_integral(
      r, w1, off.delta, [&](const neck_point& n, double jac) { return c / n.xi * n.g * jac; }, tol, "zeta (bouncing)");
  const double time_neck = bouncing_integral(
      r, w1, off.delta, [&](const neck_point& n, double jac) { return n.xi * n.g * jac; }, tol, "upsilon1");
  return {2.0 * theta_neck, time_neck, 0.0};
}

double zeta_deflection(const profile_params& p, double c, double quad_tol) {
  if (c == 0.0) return 0.0;
  return excursion_of(p, offset_of(c), quad_tol).zeta;
}

namespace {

// G(w) = sqrt(1 + xi'^2) s'(w) / w along w = xi(s) = 1 + v, plus log-derivatives.
struct hyper_g {
  double r, beta;
  explicit hyper_g(double r_) : r(r_), beta(2.0 * (r_ - 1.0) / r_) {}
  struct val {
    double g, l1, l1p;
  };
  val at(double v) const {
    const double w = 1.0 + v;
    const double vb = std::pow(v, beta);
    const double den = 1.0 + r * r * vb;
    const double g = std::pow(v, 1.0 / r - 1.0) * std::sqrt(den) / (r * w);
    const double a = 1.0 / r - 1.0;
    const double l1 = a / v + 0.5 * r * r * beta * vb / (v * den) - 1.0 / w;
    const double l1p = -a / (v * v) + 0.5 * r * r * beta * vb / (v * v) * ((beta - 1.0) - r * r * vb) / (den * den) +
                       1.0 / (w * w);
    return {g, l1, l1p};
  }
};

struct hyper_parts {
  double Z, Z1, Z2;  // int G, int G' cosh, int G'' cosh^2 over [0, Phi]
  double Phi;
};

hyper_parts hyperbolic_parts(const profile_params& p, double delta, double tol, bool derivs) {
  const double c = 1.0 + delta;
  const double a = xi_eps1(p);
  if (!(c < a)) throw window_error("bouncing: |c| >= xi(eps1)");
  const hyper_g G(p.r);
  // a/c = 1 + (a - c)/c; acosh(1 + y) = log1p(y + sqrt(y (2 + y)))
  const double y = (a - c) / c;
  const double Phi = std::log1p(y + std::sqrt(y * (2.0 + y)));
  auto v_of = [&](double phi) {
    const double sh = std::sinh(0.5 * phi);
    return delta + 2.0 * c * sh * sh;
  };
  // geometric cuts resolve the v^{1/r-1} peak of width sqrt(delta) at phi = 0
  std::vector<double> cuts{0.0};
  for (double b = std::sqrt(delta); b < Phi; b *= 4.0) cuts.push_back(b);
  cuts.push_back(Phi);
  hyper_parts out{};
  out.Phi = Phi;
  out.Z = integrate_pieces([&](double phi) { return G.at(v_of(phi)).g; }, cuts, tol, "zeta (hyperbolic)").value;
  if (derivs) {
    out.Z1 = integrate_pieces(
                 [&](double phi) {
                   const auto g = G.at(v_of(phi));
                   return g.g * g.l1 * std::cosh(phi);
                 },
                 cuts, tol, "zeta' (hyperbolic)")
                 .value;
    out.Z2 = integrate_pieces(
                 [&](double phi) {
                   const auto g = G.at(v_of(phi));
                   const double ch = std::cosh(phi);
                   return g.g * (g.l1 * g.l1 + g.l1p) * ch * ch;
                 },
                 cuts, tol, "zeta'' (hyperbolic)")
                 .value;
  }
  return out;
}

}  // namespace

double zeta_bouncing_hyperbolic(const profile_params& p, double delta, double quad_tol) {
  return 2.0 * (1.0 + delta) * hyperbolic_parts(p, delta, quad_tol, false).Z;
}

zeta_c_derivs zeta_c_derivatives(const profile_params& p, const clairaut_offset& off, double tol) {
  if (off.kind == geodesic_kind::crossing) {
    const double c = 1.0 - off.delta;
    const crossing_neck k{p.r, p.neck_width(), off.delta, c};
    // A xi^2 = xi sqrt(1 + xi'^2) in the depth variable
    const double i3 = crossing_integral(
        k, [](const neck_point& n, double q) { return n.xi * n.g / (q * std::sqrt(q)); }, tol, "zeta' (crossing)");
    const double i5 = crossing_integral(
        k, [](const neck_point& n, double q) { return n.xi * n.g / (q * q * std::sqrt(q)); }, tol, "zeta'' (crossing)");
    const double s2 = off.delta * (2.0 - off.delta);  // 1 - c^2
    const double cyl3 = p.L / (s2 * std::sqrt(s2));
    const double cyl5 = cyl3 / s2;
    const double zeta = excursion_of(p, off, tol).zeta;
    return {zeta, 2.0 * (i3 + cyl3), 6.0 * c * (i5 + cyl5)};
  }
  const double c = 1.0 + off.delta;
  const double a = xi_eps1(p);
  const auto h = hyperbolic_parts(p, off.delta, tol, true);
  const hyper_g G(p.r);
  const auto ga = G.at(a - 1.0);
  const double root = std::sqrt((a - c) * (a + c));
  const double dphi = -a / (c * root);
  const double ddphi = a * (c * a * a - 2.0 * c * c * c) / std::pow(c * root, 3.0);
  const double dZ = ga.g * dphi + h.Z1;
  const double ddZ = ga.g * ddphi + ga.g * ga.l1 * (a / c) * dphi + h.Z2;
  return {2.0 * c * h.Z, 2.0 * h.Z + 2.0 * c * dZ, 4.0 * dZ + 2.0 * c * ddZ};
}

zeta_psi_derivs zeta_derivatives(const profile_params& p, const clairaut_offset& off, double quad_tol) {
  // psi in (0, pi/2) with |c| = a cos psi: d|c|/dpsi = -a sin psi, d2|c|/dpsi2 = -|c|
  const double a = xi_eps1(p);
  const double c = off.abs_c();
  const double sin_psi = std::sqrt((a - c) * (a + c)) / a;
  const auto d = zeta_c_derivatives(p, off, quad_tol);
  const double dc = -a * sin_psi;
  return {d.zeta_c * dc, d.zeta_cc * dc * dc - d.zeta_c * c};
}

zeta_psi_derivs zeta_derivatives(const profile_params& p, double psi, double quad_tol) {
  const double cp = std::cos(psi);
  const auto off = offset_of(xi_eps1(p) * cp);
  auto d = zeta_derivatives(p, off, quad_tol);
  // reflections psi -> pi - psi, psi -> -psi act on |c| through cos psi
  const double s = sgn(cp) * sgn(std::sin(psi));
  return {d.zeta_p * s, d.zeta_pp};
}

std::pair<double, double> band_delta_range(int n) {
  const double nn = n;
  return {1.0 / ((nn + 1.0) * (nn + 1.0)), 1.0 / (nn * nn)};
}

std::optional<band_index> band_of_c(const profile_params& p, double c) {
  const double a = std::fabs(c);
  if (a == 1.0) return std::nullopt;
  const double delta = std::fabs(a - 1.0);
  const auto kind = a > 1.0 ? geodesic_kind::bouncing : geodesic_kind::crossing;
  const int n = static_cast<int>(std::floor(1.0 / std::sqrt(delta)));
  for (int m : {n - 1, n, n + 1}) {
    if (m < p.n0) continue;
    const auto [lo, hi] = band_delta_range(m);
    if (delta > lo && delta < hi) return band_index{m, kind, c < 0 ? -1 : 1};
  }
  return std::nullopt;
}

std::optional<band_index> band_of(const profile_params& p, const unit_vector& x) {
  return band_of_c(p, clairaut(p, x));
}

unit_vector entry_vector(const profile_params& p, const clairaut_offset& off, int side) {
  const double a = xi_eps1(p);
  const double c = off.abs_c();
  if (c > a) throw domain_error("entry_vector: |c| exceeds xi(eps1)");
  // psi in (0, pi): c = a cos psi, moving right from s = -eps1
  const double psi = std::atan2(std::sqrt((a - c) * (a + c)), side < 0 ? -c : c);
  return {-p.eps1(), 0.0, psi};
}

transition_result transition(const profile_params& p, const unit_vector& x, double quad_tol, double tol_c) {
  const double e1 = p.eps1();
  if (std::fabs(std::fabs(x.s) - e1) > 1e-12 * e1) throw domain_error("transition: entry must lie on |s| = eps1");
  const double side_in = sgn(x.s);
  if (!(std::sin(x.psi) * side_in < 0.0)) throw direction_error("transition: entry must point toward the cylinder");
  const double c = xi_eps1(p) * std::cos(x.psi);
  const double ac = std::fabs(c);
  if (std::fabs(ac - 1.0) <= tol_c) throw kind_error("transition: asymptotic entry");
  const auto off = offset_of(c, tol_c);
  transition_result res{};
  res.kind = off.kind;
  res.band = band_of_c(p, c);
  if (c == 0.0) {
    res.upsilon1 = excursion_of(p, off, quad_tol).upsilon1;
    res.upsilon2 = p.L;
    res.upsilon0 = res.upsilon1 + res.upsilon2;
    res.zeta = res.deflection = 0.0;
    res.exit = {-x.s, x.theta, x.psi};
    return res;
  }
  const auto ex = excursion_of(p, off, quad_tol);
  res.zeta = ex.zeta;
  res.deflection = sgn(c) * ex.zeta;
  res.upsilon1 = ex.upsilon1;
  res.upsilon2 = ex.upsilon2;
  res.upsilon0 = ex.upsilon1 + ex.upsilon2;
  const double theta = wrap_2pi(x.theta + res.deflection);
  if (off.kind == geodesic_kind::bouncing) {
    res.exit = {x.s, theta, wrap_pi(-x.psi)};
    res.turning_s = side_in * turning_point(p, c);
  } else {
    res.exit = {-x.s, theta, x.psi};
  }
  return res;
}

excursion_ode transition_by_ode(const profile_params& p, const unit_vector& x, double tol) {
  ode_options o;
  o.abs_tol = o.rel_tol = 1e-2 * tol;
  o.h0 = 1e-4;
  const double e1 = p.eps1();
  auto end = flow<3>([&](const vec<3>& y) { return geodesic_rhs(p, y); }, {x.s, x.theta, x.psi}, 1e9, o,
                     [&](const vec<3>& y) { return std::fabs(y[0]) - e1; }, no_observer{},
                     [&](const vec<3>& y) { return std::fabs(y[0]) - p.L; });
  if (!end.event) throw convergence_error("transition_by_ode: no exit");
  return {{end.x[0], end.x[1], end.x[2]}, end.x[1] - x.theta, end.t};
}

const char* to_string(band_quantity q) {
  switch (q) {
    case band_quantity::upsilon1: return "upsilon1";
    case band_quantity::upsilon2: return "upsilon2";
    case band_quantity::zeta_prime: return "zeta_prime";
    case band_quantity::zeta_double_prime: return "zeta_double_prime";
  }
  return "?";
}

double band_value(const profile_params& p, band_quantity q, const clairaut_offset& c, double quad_tol) {
  switch (q) {
    case band_quantity::upsilon1: return excursion_of(p, c, quad_tol).upsilon1;
    case band_quantity::upsilon2: return excursion_of(p, c, quad_tol).upsilon2;
    case band_quantity::zeta_prime: return std::fabs(zeta_derivatives(p, c, quad_tol).zeta_p);
    case band_quantity::zeta_double_prime: return std::fabs(zeta_derivatives(p, c, quad_tol).zeta_pp);
  }
  return 0.0;
}

namespace {

std::vector<int> log_bands(int lo, int hi, int count) {
  std::vector<int> out;
  for (int k = 0; k < count; ++k) {
    const double t = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
    const int n = static_cast<int>(std::lround(lo * std::pow(static_cast<double>(hi) / lo, t)));
    if (out.empty() || n > out.back()) out.push_back(n);
  }
  return out;
}

}  // namespace

stat_report scaling_report(const profile_params& p, band_quantity q, geodesic_kind kind, int n_lo, int n_hi, int n_bands,
                           int samples_per_band, double quad_tol, exec e) {
  if (samples_per_band < 3) throw config_error("scaling_report: need at least 3 samples per band");
  if (n_lo < p.n0) throw config_error("scaling_report: bands start at n0");
  if (q == band_quantity::upsilon2 && kind != geodesic_kind::crossing)
    throw config_error("scaling_report: upsilon2 vanishes for bouncing");
  const auto bands = log_bands(n_lo, n_hi, n_bands);
  if (bands.size() < 3) throw error("scaling_report: degenerate fit, fewer than 3 bands");
  const std::size_t m = samples_per_band;
  std::vector<double> values(bands.size() * m);
  for_each_index(values.size(), e, [&](std::size_t i) {
    const auto [lo, hi] = band_delta_range(bands[i / m]);
    const double delta = lo + (hi - lo) * (static_cast<double>(i % m) + 0.5) / static_cast<double>(m);
    values[i] = band_value(p, q, {kind, delta}, quad_tol);
  });
  stat_report rep;
  rep.name = std::string("scaling_") + to_string(q) + "_" + to_string(kind);
  auto& t = rep.add_table("bands", {"band_n", "kind", "quantity", "value"});
  std::vector<double> ns, gm;
  for (std::size_t b = 0; b < bands.size(); ++b) {
    std::span<const double> vals(values.data() + b * m, m);
    ns.push_back(bands[b]);
    gm.push_back(geometric_mean(vals));
    t.add({static_cast<std::int64_t>(bands[b]), std::string(to_string(kind)), std::string(to_string(q)), gm.back()});
  }
  const auto f = fit_loglog(ns, gm);
  rep.set("slope", f.slope);
  rep.set("intercept", f.intercept);
  rep.set("r2", f.r2);
  rep.set("bands", static_cast<double>(bands.size()));
  return rep;
}

stat_report distortion_check(const profile_params& p, const band_index& band, int pairs, std::uint64_t seed,
                             double quad_tol) {
  stat_report rep;
  rep.name = "distortion";
  rep.seed = seed;
  const auto [lo, hi] = band_delta_range(band.n);
  const double a = xi_eps1(p);
  auto psi_of = [&](double delta) {
    const double c = band.kind == geodesic_kind::crossing ? 1.0 - delta : 1.0 + delta;
    return std::acos(c / a);
  };
  auto key = stream_key(seed, tag::transit, static_cast<std::uint64_t>(band.n));
  double sup_dist = 0.0, sup_time = 0.0;
  auto& t = rep.add_table("pairs", {"psi", "psi_bar", "d_img", "log_ratio", "time_ratio"});
  for (int i = 0; i < pairs; ++i) {
    const double d0 = lo + (hi - lo) * hashed_uniform(key, 2 * i);
    const double d1 = lo + (hi - lo) * hashed_uniform(key, 2 * i + 1);
    const clairaut_offset o0{band.kind, d0}, o1{band.kind, d1};
    const auto e0 = excursion_of(p, o0, quad_tol), e1 = excursion_of(p, o1, quad_tol);
    const double z0 = zeta_derivatives(p, o0, quad_tol).zeta_p, z1 = zeta_derivatives(p, o1, quad_tol).zeta_p;
    const double dpsi = std::fabs(psi_of(d0) - psi_of(d1));
    const double d_img = std::fabs(e0.zeta - e1.zeta) + dpsi;
    const double num = std::fabs(std::log(std::fabs(z0)) - std::log(std::fabs(z1)));
    const double dist = d_img > 0 ? num / std::cbrt(d_img) : 0.0;
    const double dt = std::fabs(2.0 * (e0.upsilon1 + e0.upsilon2) - 2.0 * (e1.upsilon1 + e1.upsilon2));
    const double time = d_img > 0 ? dt / (dpsi + d_img) : 0.0;
    sup_dist = std::max(sup_dist, dist);
    sup_time = std::max(sup_time, time);
    t.add({psi_of(d0), psi_of(d1), d_img, dist, time});
  }
  rep.set("n", band.n);
  rep.set("sup_distortion_ratio", sup_dist);
  rep.set("sup_time_ratio", sup_time);
  return rep;
}

}  // namespace flatcyl
