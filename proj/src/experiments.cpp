#include "flatcyl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flatcyl/coupled.hpp"
#include "flatcyl/errors.hpp"
#include "flatcyl/flux.hpp"
#include "flatcyl/rng.hpp"
#include "flatcyl/surface.hpp"
#include "flatcyl/tower.hpp"
#include "flatcyl/transit.hpp"

namespace flatcyl {

namespace {

constexpr double pi = std::numbers::pi;

riccati_options riccati_of(const experiment_config& c) {
  riccati_options o;
  o.tol = c.tol.riccati_tol;
  o.ode_tol = c.tol.ode_tol;
  return o;
}

stat_report renamed(stat_report r, std::string name) {
  r.name = std::move(name);
  return r;
}

std::vector<stat_report> run_transition(const experiment_config& c, exec e) {
  const auto& r = c.run;
  return {clairaut_conservation(c.profile, r.clairaut_samples, r.clairaut_T, c.tol.integrate_tol, c.seed, e),
          transition_oracle(c.profile, r.oracle_samples, r.oracle_n_hi, c.tol.quad_tol, c.tol.oracle_ode_tol,
                            c.tol.tol_c, c.seed, e)};
}

std::vector<stat_report> run_bands(const experiment_config& c, exec e) {
  const auto& r = c.run;
  std::vector<stat_report> out;
  const std::pair<band_quantity, geodesic_kind> jobs[] = {
      {band_quantity::upsilon2, geodesic_kind::crossing},
      {band_quantity::upsilon1, geodesic_kind::crossing},
      {band_quantity::upsilon1, geodesic_kind::bouncing},
      {band_quantity::zeta_prime, geodesic_kind::crossing},
      {band_quantity::zeta_double_prime, geodesic_kind::crossing},
      {band_quantity::zeta_prime, geodesic_kind::bouncing},
  };
  for (const auto& [q, k] : jobs) {
    auto rep = scaling_report(c.profile, q, k, r.band_n_lo, r.band_n_hi, r.band_count, r.band_samples,
                              c.tol.quad_tol, e);
    const double rr = c.profile.r;
    double expected = 0.0;
    switch (q) {
      case band_quantity::upsilon2: expected = 1.0; break;
      case band_quantity::upsilon1: expected = (rr - 2.0) / rr; break;
      case band_quantity::zeta_prime: expected = k == geodesic_kind::crossing ? 3.0 : 3.0 - 2.0 / rr; break;
      case band_quantity::zeta_double_prime: expected = 5.0; break;
    }
    rep.set("expected_slope", expected);
    out.push_back(std::move(rep));
  }
  for (const int n : {r.band_n_lo, 4 * r.band_n_lo, 16 * r.band_n_lo}) {
    auto rep = distortion_check(c.profile, {n, geodesic_kind::crossing, 1}, 20, c.seed, c.tol.quad_tol);
    out.push_back(renamed(std::move(rep), "distortion_n" + std::to_string(n)));
  }
  return out;
}

std::vector<stat_report> run_riccati(const experiment_config& c, exec e) {
  const auto o = riccati_of(c);
  std::vector<stat_report> out;
  out.push_back(constant_curvature_check(c.profile, c.run.kappas, o, e));
  lemma_grid g;
  g.n_s = c.run.lemma_n_s;
  g.n_psi = c.run.lemma_n_psi;
  out.push_back(lemma_key_refinement(c.profile, g, o, e));
  corollary_options co;
  co.samples = c.run.riccati_samples;
  out.push_back(check_corollaries(c.profile, co, c.seed, o, e));
  return out;
}

std::vector<stat_report> run_tails(const experiment_config& c, exec e) {
  const auto& r = c.run;
  std::vector<stat_report> out;
  auto law = tail_law_report(c.profile.L, r.tail_n_lo, r.tail_n_hi, r.tail_mc_samples, r.tail_mc_n_max, c.seed, e);
  out.push_back(renamed(std::move(law), "tail_law"));
  for (double rv : r.neck_r_values) {
    profile_params p = c.profile;
    p.r = rv;
    validate(p);
    neck_tail_options no;
    no.quad_tol = c.tol.quad_tol;
    auto rep = neck_tail_report(p, r.neck_samples, c.seed, no, e);
    out.push_back(renamed(std::move(rep), "neck_tail_r" + format_double(rv)));
  }
  return out;
}

std::vector<stat_report> run_tower_clt(const experiment_config& c, exec e) {
  const auto& r = c.run;
  std::vector<stat_report> out;
  const auto m = build_tower(c.tower);
  clt_options co;
  co.n_grid = r.clt_n_grid;
  co.samples = r.clt_samples;
  co.max_sample_boost = r.clt_boost;
  out.push_back(nonstandard_clt_test(m, observable::jr0, m.sigma_J2, co, c.seed, e));

  // J = 0 on every cell: the degenerate branch
  tower_spec zero = c.tower;
  std::fill(zero.alphas.begin(), zero.alphas.end(), 0.0);
  const auto mz = build_tower(zero);
  clt_options cz;
  cz.n_grid = {r.clt_n_grid.front()};
  cz.samples = 64;
  out.push_back(renamed(nonstandard_clt_test(mz, observable::jr0, mz.sigma_J2, cz, c.seed, e), "clt_degenerate"));

  out.push_back(second_moment_report(m, r.second_moment_p));

  pair_options po;
  po.k_max = r.pair_k_max;
  po.n_set = r.pair_n_set;
  po.orbit_len = r.pair_orbit_len;
  po.beta = 3.0;
  out.push_back(pair_condition_check(m, po, c.seed));

  adde_options ao;
  ao.n_max = r.adde_n_max;
  ao.orbit_len = r.adde_orbit_len;
  // J of both signs with the same R0 law, so that J varies between columns
  tower_spec iid = c.tower;
  iid.alphas.clear();
  iid.sigmas2.clear();
  for (std::size_t i = 0; i < c.tower.alphas.size(); ++i)
    for (double sign : {1.0, -1.0}) {
      iid.alphas.push_back(sign * c.tower.alphas[i]);
      iid.sigmas2.push_back(0.5 * c.tower.sigmas2[i]);
    }
  tower_spec geo = iid;
  iid.tau = tau_mode::one;
  geo.tau = tau_mode::geometric;
  out.push_back(renamed(adde_correlation(build_tower(iid), ao, c.seed), "adde_tau_one"));
  out.push_back(renamed(adde_correlation(build_tower(geo), ao, c.seed), "adde_tau_geometric"));
  return out;
}

coupled_model coupled_of(const experiment_config& c) {
  coupled_spec s = c.coupled;
  s.quad_tol = c.tol.quad_tol;
  return build_coupled(c.profile, s);
}

std::vector<stat_report> run_wip(const experiment_config& c, exec e) {
  const auto& r = c.run;
  const auto m = coupled_of(c);
  std::vector<stat_report> out;
  out.push_back(coupled_summary(m));
  wip_options w;
  w.n = r.wip_n;
  w.samples = r.wip_samples;
  w.t_grid = r.wip_t_grid;
  out.push_back(wip_test(m, w, c.seed, e));
  pair_options po;
  po.k_max = r.pair_k_max;
  po.n_set = r.pair_n_set;
  po.orbit_len = r.pair_orbit_len;
  po.beta = 3.0;
  out.push_back(renamed(pair_condition_check(m.tower, po, c.seed), "pair_condition_coupled"));
  clt_options co;
  co.n_grid = r.r_clt_n_grid;
  co.samples = r.r_clt_samples;
  co.max_sample_boost = 1;
  out.push_back(renamed(nonstandard_clt_test(m.tower, observable::r, m.sigma_R2, co, c.seed, e), "clt_R_coupled"));
  return out;
}

std::vector<stat_report> run_decay(const experiment_config& c, exec) {
  const auto& r = c.run;
  const auto m = coupled_of(c);
  decay_options d;
  d.orbit_len = r.decay_orbit_len;
  d.lag_lo = r.decay_lag_lo;
  d.lag_hi = r.decay_lag_hi;
  d.batches = r.decay_batches;
  d.tail_n = r.decay_tail_n;
  return {decay_experiments(m, d, c.seed)};
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"transition", "bands", "riccati", "tails", "tower-clt", "wip", "decay"};
  return names;
}

bool is_subcommand(const std::string& name) {
  return name == "all" || std::find(subcommands().begin(), subcommands().end(), name) != subcommands().end();
}

std::vector<stat_report> run_subcommand(const std::string& name, const experiment_config& c, exec e) {
  std::vector<stat_report> out;
  if (name == "transition") out = run_transition(c, e);
  else if (name == "bands") out = run_bands(c, e);
  else if (name == "riccati") out = run_riccati(c, e);
  else if (name == "tails") out = run_tails(c, e);
  else if (name == "tower-clt") out = run_tower_clt(c, e);
  else if (name == "wip") out = run_wip(c, e);
  else if (name == "decay") out = run_decay(c, e);
  else if (name == "all") {
    for (const auto& s : subcommands()) {
      auto part = run_subcommand(s, c, e);
      for (auto& r : part) out.push_back(std::move(r));
    }
    return out;
  } else {
    throw config_error("unknown subcommand '" + name + "'");
  }
  for (auto& r : out) r.seed = c.seed;
  return out;
}

stat_report clairaut_conservation(const profile_params& p, std::size_t samples, double T, double tol,
                                  std::uint64_t seed, exec e) {
  if (samples == 0 || !(T > 0.0)) throw config_error("clairaut_conservation: need samples and T > 0");
  struct row {
    unit_vector x;
    bool exited;
    double exit_time, drift;
  };
  std::vector<row> rows(samples);
  for_each_index(samples, e, [&](std::size_t i) {
    const auto key = stream_key(seed, tag::clairaut, i);
    const unit_vector x{p.eps0 * (2.0 * hashed_uniform(key, 0) - 1.0), 2.0 * pi * hashed_uniform(key, 1),
                        2.0 * pi * hashed_uniform(key, 2) - pi};
    const auto tr = integrate(p, x, T, tol, false);
    rows[i] = {x, tr.exited, tr.exit_time, tr.max_clairaut_drift};
  });
  stat_report rep;
  rep.name = "clairaut_conservation";
  rep.seed = seed;
  auto& t = rep.add_table("samples", {"s", "theta", "psi", "exited", "end_time", "max_drift"});
  double sup = 0.0, exited = 0.0, flow = 0.0;
  for (const auto& r : rows) {
    sup = std::max(sup, r.drift);
    exited += r.exited;
    flow += r.exit_time;
    t.add({r.x.s, r.x.theta, r.x.psi, std::int64_t{r.exited}, r.exit_time, r.drift});
  }
  rep.set("sup_drift", sup);
  rep.set("samples", static_cast<double>(samples));
  rep.set("T", T);
  rep.set("exited", exited);
  rep.set("total_flow_time", flow);
  return rep;
}

stat_report transition_oracle(const profile_params& p, std::size_t samples, int n_hi, double quad_tol,
                              double ode_tol, double tol_c, std::uint64_t seed, exec e) {
  if (samples == 0 || n_hi < p.n0) throw config_error("transition_oracle: need samples and n_hi >= n0");
  struct row {
    int n, side;
    geodesic_kind kind;
    double delta, zeta_err, time_err, exit_s_err;
  };
  std::vector<row> rows(samples);
  for_each_index(samples, e, [&](std::size_t i) {
    const auto key = stream_key(seed, tag::transit, i);
    const geodesic_kind kind = i % 2 ? geodesic_kind::bouncing : geodesic_kind::crossing;
    const int n = p.n0 + std::min(n_hi - p.n0, static_cast<int>(hashed_uniform(key, 0) * (n_hi - p.n0 + 1)));
    const auto [lo, hi] = band_delta_range(n);
    const double delta = lo + (hi - lo) * hashed_uniform(key, 1);
    const int side = hashed_uniform(key, 2) < 0.5 ? -1 : 1;
    const auto x = entry_vector(p, {kind, delta}, side);
    const auto tr = transition(p, x, quad_tol, tol_c);
    const auto ode = transition_by_ode(p, x, ode_tol);
    rows[i] = {n,     side, kind, delta, std::fabs(tr.deflection - ode.theta_advance),
               std::fabs(2.0 * tr.upsilon0 - ode.time), std::fabs(tr.exit.s - ode.exit.s)};
  });
  stat_report rep;
  rep.name = "transition_oracle";
  rep.seed = seed;
  auto& t = rep.add_table("entries", {"band_n", "kind", "side", "delta", "zeta_error", "time_error", "exit_s_error"});
  double zmax = 0.0, tmax = 0.0, smax = 0.0;
  int n_lo_seen = n_hi, n_hi_seen = p.n0;
  for (const auto& r : rows) {
    zmax = std::max(zmax, r.zeta_err);
    tmax = std::max(tmax, r.time_err);
    smax = std::max(smax, r.exit_s_err);
    n_lo_seen = std::min(n_lo_seen, r.n);
    n_hi_seen = std::max(n_hi_seen, r.n);
    t.add({std::int64_t{r.n}, std::string(to_string(r.kind)), std::int64_t{r.side}, r.delta, r.zeta_err, r.time_err,
           r.exit_s_err});
  }
  rep.set("max_zeta_error", zmax);
  rep.set("max_time_error", tmax);
  rep.set("max_exit_s_error", smax);
  rep.set("samples", static_cast<double>(samples));
  rep.set("band_min", n_lo_seen);
  rep.set("band_max", n_hi_seen);
  return rep;
}

stat_report constant_curvature_check(const profile_params& p, const std::vector<double>& kappas,
                                     const riccati_options& o, exec e) {
  const std::vector<double> ss{0.0, 0.5 * p.L, p.L, 0.5 * (p.L + p.eps0), p.eps0 - 0.05};
  const int n_psi = 12;
  const std::size_t per = ss.size() * n_psi;
  std::vector<double> k(kappas.size() * per);
  for_each_index(k.size(), e, [&](std::size_t i) {
    riccati_options oc = o;
    oc.model = curvature_model::constant;
    oc.kappa = kappas[i / per];
    const std::size_t j = i % per;
    const double psi = -pi + 2.0 * pi * (static_cast<double>(j % n_psi) + 0.25) / n_psi;
    k[i] = k_plus(p, {ss[j / n_psi], 0.0, psi}, oc);
  });
  stat_report rep;
  rep.name = "riccati_constant";
  auto& t = rep.add_table("points", {"kappa", "s", "psi", "k_plus", "error"});
  double worst = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double kap = kappas[i / per];
    const std::size_t j = i % per;
    const double psi = -pi + 2.0 * pi * (static_cast<double>(j % n_psi) + 0.25) / n_psi;
    const double err = std::fabs(k[i] - std::sqrt(kap));
    worst = std::max(worst, err);
    t.add({kap, ss[j / n_psi], psi, k[i], err});
  }
  rep.set("max_error", worst);
  rep.set("points", static_cast<double>(k.size()));
  return rep;
}

stat_report second_moment_report(const tower_model& m, const std::vector<std::int64_t>& ps) {
  stat_report rep;
  rep.name = "second_moment";
  auto& t = rep.add_table("moments", {"p", "moment", "two_sigma2_log_p", "deviation"});
  double lo = INFINITY, hi = -INFINITY;
  for (auto p : ps) {
    const double mom = exact_second_moment(m, p);
    const double ref = 2.0 * m.sigma_J2 * std::log(static_cast<double>(p));
    t.add({p, mom, ref, mom - ref});
    if (p >= 10000) {
      lo = std::min(lo, mom - ref);
      hi = std::max(hi, mom - ref);
    }
  }
  rep.set("sigma_J2", m.sigma_J2);
  if (hi >= lo) {
    rep.set("oscillation", hi - lo);
    rep.set("oscillation_over_sigma_J2", m.sigma_J2 > 0.0 ? (hi - lo) / m.sigma_J2 : 0.0);
  } else {
    rep.flags.push_back("no_p_at_least_1e4");
  }
  return rep;
}

}  // namespace flatcyl
