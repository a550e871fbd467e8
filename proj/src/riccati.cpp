#include "flatcyl/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "flatcyl/errors.hpp"
#include "flatcyl/rng.hpp"
#include "flatcyl/stats.hpp"
#include "flatcyl/transit.hpp"

namespace flatcyl {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double to_w = 10.0;   // integrate w = 1/u above this
constexpr double to_u = 0.2;    // and return to u when w exceeds this (u < 5)

ode_options ode_of(const riccati_options& o) {
  ode_options oo;
  oo.abs_tol = oo.rel_tol = o.ode_tol;
  oo.h0 = 1e-3;
  return oo;
}

struct leg_result {
  vec<3> end;
  double u;
  double min_u;
  std::size_t steps;
};

// Coupled geodesic + Riccati from z with u(start) = u0 over the given duration.
leg_result forward_leg(const profile_params& p, const vec<3>& z, double u0, double duration,
                       const riccati_options& o, table* rec = nullptr) {
  const bool constant = o.model == curvature_model::constant;
  auto K = [&](double s) { return constant ? -o.kappa : curvature_unchecked(p, s); };
  bool wmode = u0 > to_w;
  vec<4> st{z[0], z[1], z[2], wmode ? 1.0 / u0 : u0};
  leg_result out{z, u0, u0, 0};
  double t = 0.0;
  auto track = [&](double tl, const vec<4>& y) {
    const double u = wmode ? 1.0 / y[3] : y[3];
    if (!std::isfinite(u) || u < -1e-9) throw error("riccati: u left [0, inf), K <= 0 forbids this");
    out.min_u = std::min(out.min_u, u);
    if (rec) rec->add({t + tl - duration, u, K(y[0])});
  };
  const auto opts = ode_of(o);
  while (t < duration) {
    auto rhs = [&](const vec<4>& y) {
      vec<4> d{0.0, 0.0, 0.0, 0.0};
      if (!constant) {
        const auto g = geodesic_rhs(p, {y[0], y[1], y[2]});
        d = {g[0], g[1], g[2], 0.0};
      }
      const double k = K(y[0]);
      d[3] = wmode ? 1.0 + k * y[3] * y[3] : -y[3] * y[3] - k;
      return d;
    };
    auto ev = [&](const vec<4>& y) { return wmode ? y[3] - to_u : y[3] - to_w; };
    auto brk = [&](const vec<4>& y) { return std::fabs(y[0]) - p.L; };
    const auto end = flow<4>(rhs, st, duration - t, opts, ev, track, brk);
    out.steps += end.steps;
    st = end.x;
    if (!end.event) break;
    t += end.t;
    st[3] = 1.0 / st[3];
    wmode = !wmode;
  }
  out.end = {st[0], st[1], st[2]};
  out.u = wmode ? 1.0 / st[3] : st[3];
  return out;
}

struct back_trace {
  vec<3> start;     // forward-oriented start of the leg
  double duration;  // time from start to x
  bool exited;
};

// Follows the geodesic backward from x for time T or until it leaves the surface.
back_trace trace_back(const profile_params& p, const unit_vector& x, double T, const riccati_options& o) {
  if (o.model == curvature_model::constant) return {{x.s, x.theta, x.psi}, T, false};
  const auto rx = reverse(x);
  // on the boundary with the past outside: the start is already on the extension
  if (std::fabs(x.s) >= p.eps0 && std::sin(rx.psi) * x.s >= 0.0) return {{x.s, x.theta, x.psi}, 0.0, true};
  const auto end = flow<3>([&](const vec<3>& y) { return geodesic_rhs(p, y); }, {rx.s, rx.theta, rx.psi}, T,
                           ode_of(o), [&](const vec<3>& y) { return std::fabs(y[0]) - p.eps0; }, no_observer{},
                           [&](const vec<3>& y) { return std::fabs(y[0]) - p.L; });
  return {{end.x[0], end.x[1], end.x[2] + pi}, end.t, end.event};
}

}  // namespace

double riccati_constant_solution(double kappa, double u0, double t) {
  const double sk = std::sqrt(kappa), th = std::tanh(sk * t);
  return sk * (u0 + sk * th) / (sk + u0 * th);
}

riccati_run riccati_at_horizon(const profile_params& p, const unit_vector& x, double T, const riccati_options& o) {
  const auto bt = trace_back(p, x, T, o);
  const double u0 = bt.exited ? std::sqrt(p.kappa_cap) : o.u_init;
  const auto leg = forward_leg(p, bt.start, u0, bt.duration, o);
  riccati_run r;
  r.k = leg.u;
  r.horizon = T;
  r.exited = bt.exited;
  r.exit_time = bt.exited ? bt.duration : T;
  r.min_u = leg.min_u;
  r.steps = leg.steps;
  return r;
}

riccati_run k_plus_run(const profile_params& p, const unit_vector& x, const riccati_options& o) {
  if (!(o.tol > 0.0 && o.ode_tol > 0.0 && o.T0 > 0.0)) throw config_error("riccati: tolerances and T0 must be positive");
  if (std::fabs(x.s) > p.eps0) {
    // footprint on the constant-curvature extension: exact fixed point
    riccati_run r;
    r.k = r.min_u = std::sqrt(p.kappa_cap);
    r.exited = true;
    return r;
  }
  double T = o.T0;
  auto prev = riccati_at_horizon(p, x, T, o);
  if (prev.exited) return prev;  // independent of every larger horizon
  for (int d = 1;; ++d) {
    T *= 2.0;
    if (T > o.T_max) throw convergence_error("riccati: horizon doubling did not converge below T_max");
    auto cur = riccati_at_horizon(p, x, T, o);
    cur.doublings = d;
    cur.min_u = std::min(cur.min_u, prev.min_u);
    if (cur.exited || std::fabs(cur.k - prev.k) < o.tol) return cur;
    prev = cur;
  }
}

stat_report riccati_trace(const profile_params& p, const unit_vector& x, const riccati_options& o) {
  const auto run = k_plus_run(p, x, o);
  stat_report rep;
  rep.name = "riccati_trace";
  auto& t = rep.add_table("trace", {"t", "u", "K"});
  double gap = 0.0;
  if (std::fabs(x.s) <= p.eps0) {
    const auto bt = trace_back(p, x, run.horizon, o);
    forward_leg(p, bt.start, bt.exited ? std::sqrt(p.kappa_cap) : o.u_init, bt.duration, o, &t);
    if (!run.exited) gap = std::fabs(run.k - riccati_at_horizon(p, x, run.horizon / 2, o).k);
  }
  auto fine = o;
  fine.ode_tol = o.ode_tol / 100;
  rep.set("k_plus", run.k);
  rep.set("horizon", run.horizon);
  rep.set("exited", run.exited ? 1.0 : 0.0);
  rep.set("exit_time", run.exit_time);
  rep.set("doublings", run.doublings);
  rep.set("min_u", run.min_u);
  rep.set("horizon_gap", gap);
  rep.set("tolerance_sensitivity", std::fabs(run.k - k_plus(p, x, fine)));
  return rep;
}

double k_plus(const profile_params& p, const unit_vector& x, const riccati_options& o) {
  return k_plus_run(p, x, o).k;
}

double k_minus(const profile_params& p, const unit_vector& x, const riccati_options& o) {
  return k_plus(p, reverse(x), o);
}

const char* to_string(footprint f) {
  switch (f) {
    case footprint::cylinder: return "cylinder";
    case footprint::neck: return "neck";
    case footprint::extension: return "extension";
  }
  return "?";
}

curvature_sample curvatures(const profile_params& p, const unit_vector& x, const riccati_options& o) {
  curvature_sample c{};
  c.x = x;
  const double as = std::fabs(x.s);
  if (as > p.eps0) {
    c.where = footprint::extension;
    c.a = p.eps0 - p.L;
    c.K = -p.kappa_cap;
    c.k_plus = c.k_minus = std::sqrt(p.kappa_cap);
    return c;
  }
  c.where = as <= p.L ? footprint::cylinder : footprint::neck;
  c.a = std::max(0.0, as - p.L);
  c.K = curvature(p, x.s);
  c.k_plus = k_plus(p, x, o);
  c.k_minus = k_minus(p, x, o);
  return c;
}

namespace {

std::vector<double> nested_log(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo * std::pow(hi / lo, n == 1 ? 0.0 : double(i) / (n - 1)));
  return v;
}

std::vector<double> nested_lin(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * (n == 1 ? 0.0 : double(i) / (n - 1)));
  return v;
}

}  // namespace

stat_report check_lemma_key(const profile_params& p, const lemma_grid& g, const riccati_options& o, exec e) {
  if (g.n_s < 2 || g.n_psi < 3 || !(g.psi_min >= 1e-6) || !(g.psi_split > g.psi_min && g.psi_split < pi / 2))
    throw config_error("check_lemma_key: grid needs n_s >= 2, n_psi >= 3, 1e-6 <= psi_min < psi_split < pi/2");
  const double w = p.eps0 - p.L;
  std::vector<double> ss = nested_lin(0.0, p.L, g.n_s);
  for (double a : nested_log(1e-3 * w, w, g.n_s)) ss.push_back(p.L + a);
  auto psis = nested_log(g.psi_min, g.psi_split, g.n_psi);
  const auto upper = nested_lin(g.psi_split, pi / 2, g.n_psi);
  psis.insert(psis.end(), upper.begin() + 1, upper.end());
  // four orientations per reference angle; reverse() maps 0<->3 and 1<->2
  const std::size_t per = 4, n = ss.size() * psis.size() * per;
  std::vector<double> k(n);
  auto vec_of = [&](std::size_t i) {
    const double s = ss[i / (psis.size() * per)];
    const double pt = psis[(i / per) % psis.size()];
    const double psi[4] = {pt, pi - pt, -pt, pt - pi};
    return unit_vector{s, 0.0, psi[i % per]};
  };
  for_each_index(n, e, [&](std::size_t i) { k[i] = k_plus(p, vec_of(i), o); });

  stat_report rep;
  rep.name = "lemma_key";
  auto& t = rep.add_table("grid", {"s", "psi", "a", "k_plus", "k_minus"});
  const double r = p.r;
  double sup1 = 0.0, inf3 = std::numeric_limits<double>::infinity(), inf4 = inf3;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = vec_of(i);
    const std::size_t rev = i - i % per + (3 - i % per);
    const double a = std::max(0.0, std::fabs(x.s) - p.L);
    const double pt = psi_tilde(x.psi);
    for (double kk : {k[i], k[rev]}) {
      sup1 = std::max(sup1, kk / std::max(std::pow(a, (r - 2) / 2), std::pow(pt, (r - 2) / r)));
      inf3 = std::min(inf3, kk / pt);
      if (a > 0) inf4 = std::min(inf4, kk / std::pow(a, (r - 1) / 2));
    }
    t.add({x.s, x.psi, a, k[i], k[rev]});
  }
  rep.set("sup_upper_ratio", sup1);
  rep.set("inf_psi_ratio", inf3);
  rep.set("inf_depth_ratio", inf4);
  rep.set("points", static_cast<double>(n));

  // exponent of k+ in |psi| at the shallowest neck depth and on the cylinder axis
  auto slope_at = [&](double s) {
    std::vector<double> lp, lk;
    for (std::size_t j = 0; j < psis.size(); ++j) {
      if (psis[j] > 0.1) continue;
      const double kk = k_plus(p, {s, 0.0, psis[j]}, o);
      lp.push_back(std::log(psis[j]));
      lk.push_back(std::log(kk));
    }
    return fit_line(lp, lk).slope;
  };
  rep.set("psi_exponent_neck", slope_at(p.L + 1e-3 * w));
  rep.set("psi_exponent_cylinder", slope_at(0.0));
  rep.set("psi_exponent_lo", (r - 2) / r);
  rep.set("psi_exponent_hi", 1.0);
  return rep;
}

stat_report lemma_key_refinement(const profile_params& p, const lemma_grid& g, const riccati_options& o, exec e) {
  const auto a = check_lemma_key(p, g, o, e);
  const auto b = check_lemma_key(p, g.refined(), o, e);
  stat_report rep;
  rep.name = "lemma_key_refinement";
  double worst = 0.0;
  for (const char* key : {"sup_upper_ratio", "inf_psi_ratio", "inf_depth_ratio"}) {
    const double va = a.get(key), vb = b.get(key);
    const double rel = std::fabs(vb - va) / std::fabs(va);
    rep.set(std::string(key) + "_coarse", va);
    rep.set(std::string(key) + "_fine", vb);
    rep.set(std::string(key) + "_change", rel);
    if (!(std::isfinite(va) && std::isfinite(vb) && va > 0 && vb > 0)) rep.flags.push_back(std::string(key) + "_degenerate");
    worst = std::max(worst, rel);
  }
  rep.set("max_change", worst);
  rep.set("psi_exponent_neck", b.get("psi_exponent_neck"));
  rep.set("psi_exponent_cylinder", b.get("psi_exponent_cylinder"));
  rep.tables = b.tables;
  return rep;
}

namespace {

// meridian arc length between two parallels on the same side
double meridian_distance(const profile_params& p, double s0, double s1) {
  double lo = std::min(std::fabs(s0), std::fabs(s1)), hi = std::max(std::fabs(s0), std::fabs(s1));
  auto f = [&](double s) {
    const double d = profile_unchecked(p, s).xi_p;
    return std::sqrt(1.0 + d * d);
  };
  const double mid = std::clamp(p.L, lo, hi);
  double d = 0.0;
  if (mid > lo) d += integrate_gk(f, lo, mid, 1e-10, "meridian").value;
  if (hi > mid) d += integrate_gk(f, mid, hi, 1e-10, "meridian").value;
  return d;
}

}  // namespace

stat_report check_corollaries(const profile_params& p, const corollary_options& c, std::uint64_t seed,
                              const riccati_options& o, exec e) {
  if (c.samples < 4) throw config_error("check_corollaries: too few samples");
  const std::size_t n = c.samples;
  std::vector<curvature_sample> xs(n);
  const double ext_width = 1.0;  // footprints on the extension: |s| in (eps0, eps0 + 1)
  for_each_index(n, e, [&](std::size_t i) {
    const auto key = stream_key(seed, tag::riccati, i);
    const double u_region = hashed_uniform(key, 0), u_s = hashed_uniform(key, 1);
    const double side = hashed_uniform(key, 2) < 0.5 ? -1.0 : 1.0;
    double s;
    if (u_region < c.cylinder_fraction) s = p.L * u_s;
    else if (u_region < c.cylinder_fraction + c.neck_fraction) s = p.L + (p.eps0 - p.L) * u_s;
    else s = p.eps0 + ext_width * u_s;
    double psi = 0.0;
    for (std::uint64_t k = 3;; ++k) {
      psi = pi * (2.0 * hashed_uniform(key, k) - 1.0);
      if (psi_tilde(psi) >= c.psi_min) break;
    }
    xs[i] = curvatures(p, {side * s, 0.0, psi}, o);
  });

  const double r = p.r;
  const double q = std::min(1.0, 2.0 * (r - 3.0) / (r - 1.0));
  struct consts {
    double c42 = 0, c431 = 0, c432 = 0, l442 = 0, c45 = 0;
  };
  auto evaluate = [&](std::size_t m) {
    consts k;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& x = xs[i];
      const double e42 = r / (r - 2.0);
      k.c42 = std::max({k.c42, std::pow(x.k_minus, e42) / x.k_plus, std::pow(x.k_plus, e42) / x.k_minus});
      if (x.where == footprint::neck) k.c432 = std::max(k.c432, std::fabs(x.K) / std::pow(x.k_plus, 2 * (r - 2) / (r - 1)));
      else k.c431 = std::max(k.c431, std::fabs(x.K) / (x.k_plus * x.k_plus));
    }
    // pairs (2j, 2j+1) placed on one meridian of the same side; extension pairs skipped
    for (std::size_t j = 0; j + 1 < m; j += 2) {
      const auto &x0 = xs[j], &x1 = xs[j + 1];
      if (x0.where == footprint::extension || x1.where == footprint::extension) continue;
      const double d = meridian_distance(p, x0.x.s, x1.x.s);
      if (d == 0.0) continue;
      const double K0 = curvature(p, std::fabs(x0.x.s)), K1 = curvature(p, std::fabs(x1.x.s));
      const double dK = std::fabs(K0 - K1);
      if (x0.where == footprint::neck && x1.where == footprint::neck) {
        const double m01 = std::max(std::fabs(K0), std::fabs(K1));
        k.l442 = std::max(k.l442, dK / (std::pow(m01, (r - 3) / (r - 2)) * d));
      }
      k.c45 = std::max(k.c45, dK / ((std::pow(x0.k_plus, q) + std::pow(x1.k_plus, q)) * d + d * d));
    }
    return k;
  };
  const auto all = evaluate(n), half = evaluate(n / 2);

  stat_report rep;
  rep.name = "corollaries";
  rep.seed = seed;
  auto put = [&](const std::string& name, double v_all, double v_half) {
    rep.set(name, v_all);
    rep.set(name + "_half", v_half);
    rep.set(name + "_change", v_all > 0 ? (v_all - v_half) / v_all : 0.0);
    if (!std::isfinite(v_all)) rep.flags.push_back(name + "_infinite");
  };
  put("C_kminus_kplus", all.c42, half.c42);
  put("C_K_kplus_sq", all.c431, half.c431);
  put("C_K_kplus_neck", all.c432, half.c432);
  put("C_K_lipschitz_neck", all.l442, half.l442);
  put("C_K_modulus", all.c45, half.c45);
  rep.set("q", q);
  rep.set("samples", static_cast<double>(n));

  // every sample satisfies its inequality with the recorded constants
  const double e42 = r / (r - 2.0);
  std::size_t violations = 0, counts[3] = {0, 0, 0};
  auto& t = rep.add_table("samples", {"s", "psi", "a", "region", "K", "k_plus", "k_minus"});
  for (const auto& x : xs) {
    ++counts[static_cast<int>(x.where)];
    if (std::pow(x.k_minus, e42) > all.c42 * x.k_plus || std::pow(x.k_plus, e42) > all.c42 * x.k_minus) ++violations;
    if (x.where == footprint::neck ? std::fabs(x.K) > all.c432 * std::pow(x.k_plus, 2 * (r - 2) / (r - 1))
                                   : std::fabs(x.K) > all.c431 * x.k_plus * x.k_plus)
      ++violations;
    t.add({x.x.s, x.x.psi, x.a, std::string(to_string(x.where)), x.K, x.k_plus, x.k_minus});
  }
  rep.set("violations", static_cast<double>(violations));
  rep.set("cylinder_samples", static_cast<double>(counts[0]));
  rep.set("neck_samples", static_cast<double>(counts[1]));
  rep.set("extension_samples", static_cast<double>(counts[2]));
  return rep;
}

stat_report modulus_probe(const profile_params& p, const unit_vector& x, const std::vector<double>& deltas,
                          const riccati_options& o) {
  if (std::fabs(x.s) > p.eps0) throw domain_error("modulus_probe: footprint outside the surface");
  const auto run = k_plus_run(p, x, o);
  const double T = run.exited ? run.exit_time : run.horizon;
  const auto bt = trace_back(p, x, T, o);
  const double u0 = bt.exited ? std::sqrt(p.kappa_cap) : o.u_init;
  const auto base = forward_leg(p, bt.start, u0, bt.duration, o);
  stat_report rep;
  rep.name = "modulus_probe";
  auto& t = rep.add_table("pairs", {"delta", "separation", "k_difference"});
  std::vector<double> le, ld;
  for (double d : deltas) {
    auto z = bt.start;
    z[2] += d;
    const auto leg = forward_leg(p, z, u0, bt.duration, o);
    const auto v = profile_unchecked(p, base.end[0]);
    const double ds = leg.end[0] - base.end[0], dth = leg.end[1] - base.end[1], dps = leg.end[2] - base.end[2];
    const double eps = std::sqrt((1 + v.xi_p * v.xi_p) * ds * ds + v.xi * v.xi * dth * dth + dps * dps);
    const double dk = std::fabs(leg.u - base.u);
    t.add({d, eps, dk});
    if (d > 0 && eps > 0 && dk > 0) {
      le.push_back(std::log(eps));
      ld.push_back(std::log(dk));
    }
  }
  rep.set("k_plus", base.u);
  rep.set("horizon", bt.duration);
  if (le.size() >= 3) rep.set("fitted_exponent", fit_line(le, ld).slope);
  else rep.flags.push_back("too_few_nonzero_pairs");
  rep.set("reference_exponent_r45", (4.5 - 1.0) / 4.0);
  return rep;
}

}  // namespace flatcyl
