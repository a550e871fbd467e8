#include "flatcyl/coupled.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>
#include <numbers>

#include "flatcyl/errors.hpp"
#include "flatcyl/flux.hpp"
#include "flatcyl/stats.hpp"
#include "flatcyl/transit.hpp"

namespace flatcyl {

namespace {

constexpr double pi = std::numbers::pi;

std::int64_t neck_steps(const profile_params& p, const clairaut_offset& c, double quad_tol) {
  return std::llround(2.0 * excursion_of(p, c, quad_tol).upsilon1);
}

std::shared_ptr<const neck_law> tabulate(const profile_params& p, double quad_tol, std::int64_t n_lo,
                                         std::int64_t head, bool crossing) {
  auto law = std::make_shared<neck_law>();
  std::vector<std::int64_t> tab(static_cast<std::size_t>(head + 1), 0);
  for_each_index(static_cast<std::size_t>(head + 1 - n_lo), exec::parallel, [&](std::size_t i) {
    const std::int64_t n = n_lo + static_cast<std::int64_t>(i);
    tab[static_cast<std::size_t>(n)] =
        crossing ? crossing_neck_steps(p, n, quad_tol) : bouncing_neck_steps(p, n, quad_tol);
  });
  law->table = std::move(tab);
  law->beyond = [p, quad_tol, crossing](std::int64_t n) {
    return crossing ? crossing_neck_steps(p, n, quad_tol) : bouncing_neck_steps(p, n, quad_tol);
  };
  // large-n growth from the last octave of the table
  const auto a = static_cast<double>(law->table[static_cast<std::size_t>(head / 2)]);
  const auto b = static_cast<double>(law->table[static_cast<std::size_t>(head)]);
  law->growth = (a > 0.0 && b > 0.0) ? std::log(b / a) / std::log(static_cast<double>(head) / (head / 2)) : 0.0;
  return law;
}

bool nondecreasing_from(const neck_law& l, std::int64_t n_lo) {
  for (std::size_t n = static_cast<std::size_t>(n_lo) + 1; n < l.table.size(); ++n)
    if (l.table[n] < l.table[n - 1]) return false;
  return true;
}

}  // namespace

std::int64_t crossing_neck_steps(const profile_params& p, std::int64_t n, double quad_tol) {
  if (n < 1) throw domain_error("crossing_neck_steps: n >= 1");
  const double k = p.L / pi, nn = static_cast<double>(n);
  const double t = 0.5 * (k / nn + k / (nn + 1.0));
  const double r = std::sqrt(1.0 + t * t);
  return neck_steps(p, {geodesic_kind::crossing, t * t / (r * (1.0 + r))}, quad_tol);
}

std::int64_t bouncing_neck_steps(const profile_params& p, std::int64_t n, double quad_tol) {
  if (n < 1) throw domain_error("bouncing_neck_steps: n >= 1");
  const auto [lo, hi] = band_delta_range(static_cast<int>(std::min<std::int64_t>(n, 1 << 30)));
  return std::max<std::int64_t>(1, neck_steps(p, {geodesic_kind::bouncing, 0.5 * (lo + hi)}, quad_tol));
}

coupled_model build_coupled(const profile_params& p, const coupled_spec& s) {
  if (!(s.A_total > 0.0) || !(s.h_bar > 0.0) || !(s.quad_tol > 0.0))
    throw config_error("build_coupled: A_total, h_bar and quad_tol must be positive");
  if (s.head < p.n0 + 2) throw config_error("build_coupled: head must exceed n0");
  coupled_model m;
  m.profile = p;
  m.spec = s;
  auto& t = m.tower;
  t.tau = tau_mode::one;
  t.head = s.head;
  const auto cross = tabulate(p, s.quad_tol, 1, s.head, true);
  const auto bounce = tabulate(p, s.quad_tol, p.n0, s.head, false);
  m.neck_monotone = nondecreasing_from(*cross, 1) && nondecreasing_from(*bounce, p.n0);
  const double sides[2] = {s.alpha0, s.alpha_pi};
  const char* names[2] = {"0", "pi"};
  for (int side = 0; side < 2; ++side) {
    cell_family c;
    c.kind = cell_family::law::winding;
    c.name = std::string("crossing_") + names[side];
    c.j = sides[side];
    c.n_min = 1;
    c.L = p.L;
    c.scale = 1.0 / (2.0 * s.A_total);
    c.neck = cross;
    t.families.push_back(c);
    cell_family b;
    b.kind = cell_family::law::band;
    b.name = std::string("bouncing_") + names[side];
    b.j = sides[side];
    b.n_min = p.n0;
    b.r0_zero = true;
    b.scale = 4.0 * pi / s.A_total;
    b.neck = bounce;
    t.families.push_back(b);
  }
  for (const auto& f : t.families) (f.kind == cell_family::law::winding ? m.crossing_mass : m.bouncing_mass) += f.mass();
  m.block_mass = 1.0 - m.crossing_mass - m.bouncing_mass;
  if (m.block_mass < 0.0)
    throw infeasible_error("build_coupled: excursion mass " + format_double(1.0 - m.block_mass) +
                           " exceeds 1; increase A_total");
  cell_family blk;
  blk.kind = cell_family::law::point;
  blk.name = "block";
  blk.j = 0.0;
  blk.n_min = 1;
  blk.r0_zero = true;
  blk.point_mass = m.block_mass;
  t.families.push_back(blk);
  t.alphas = {s.alpha0, s.alpha_pi};
  t.prepare();

  m.sigma_R2 = sigma_R_sq(p.L, s.A_total);
  m.I_v = s.alpha0 * s.alpha0 + s.alpha_pi * s.alpha_pi;
  m.sigma_J2 = 0.5 * m.sigma_R2 * m.I_v;
  t.sigma_J2 = m.sigma_J2;
  m.R_bar = t.mean_r;
  m.sigma_v2 = m.sigma_J2 / (s.h_bar * m.R_bar);
  m.b_S = m.sigma_R2 / (2.0 * s.h_bar * m.R_bar);
  return m;
}

double coupled_model::tail_r(std::int64_t n) const {
  if (n < 1) return 1.0;
  double s = 0.0;
  for (const auto& f : tower.families) {
    if (f.kind == cell_family::law::point) {
      if (f.r(f.n_min) > n) s += f.point_mass;
      continue;
    }
    if (f.kind == cell_family::law::winding) {
      // R(k) >= k: every cell above n counts, the rest one by one
      s += f.tail(n);
      for (std::int64_t k = n; k >= f.n_min; --k)
        if (f.r(k) > n) s += f.pmf(k);
      continue;
    }
    // bouncing: R(k) = max(1, neck(k)) nondecreasing, so find the first band above n
    std::int64_t lo = f.n_min - 1, hi = f.n_min;
    while (f.r(hi) <= n) {
      lo = hi;
      hi *= 2;
    }
    while (hi - lo > 1) {
      const std::int64_t mid = lo + (hi - lo) / 2;
      (f.r(mid) > n ? hi : lo) = mid;
    }
    s += f.tail(hi - 1);
  }
  return s;
}

std::vector<double> coupled_model::r_pmf(std::int64_t k_max) const {
  std::vector<double> f(static_cast<std::size_t>(k_max + 1), 0.0);
  for (const auto& fam : tower.families) {
    if (fam.kind == cell_family::law::point) {
      const auto r = fam.r(fam.n_min);
      if (r <= k_max) f[static_cast<std::size_t>(r)] += fam.point_mass;
      continue;
    }
    // R is nondecreasing in the cell index: stop once it exceeds k_max
    for (std::int64_t n = fam.n_min;; ++n) {
      const auto r = fam.r(n);
      if (r > k_max) break;
      f[static_cast<std::size_t>(r)] += fam.pmf(n);
    }
  }
  return f;
}

std::vector<double> renewal_covariance(const std::vector<double>& f, double R_bar, std::int64_t k_max) {
  std::vector<double> u(static_cast<std::size_t>(k_max + 1), 0.0);
  u[0] = 1.0;
  for (std::int64_t n = 1; n <= k_max; ++n) {
    double s = 0.0;
    for (std::int64_t k = 1; k <= n && k < static_cast<std::int64_t>(f.size()); ++k)
      s += f[static_cast<std::size_t>(k)] * u[static_cast<std::size_t>(n - k)];
    u[static_cast<std::size_t>(n)] = s;
  }
  std::vector<double> c(u.size());
  for (std::size_t n = 0; n < u.size(); ++n) c[n] = (u[n] - 1.0 / R_bar) / R_bar;
  return c;
}

stat_report coupled_summary(const coupled_model& m) {
  stat_report rep;
  rep.name = "coupled_model";
  rep.set("L", m.profile.L);
  rep.set("A_total", m.spec.A_total);
  rep.set("alpha0", m.spec.alpha0);
  rep.set("alpha_pi", m.spec.alpha_pi);
  rep.set("h_bar", m.spec.h_bar);
  rep.set("sigma_R2", m.sigma_R2);
  rep.set("I_v", m.I_v);
  rep.set("sigma_J2", m.sigma_J2);
  rep.set("R_bar", m.R_bar);
  rep.set("sigma_v2", m.sigma_v2);
  rep.set("b_S", m.b_S);
  rep.set("identity_residual", std::fabs(m.sigma_v2 - m.b_S * m.I_v));
  rep.set("crossing_mass", m.crossing_mass);
  rep.set("bouncing_mass", m.bouncing_mass);
  rep.set("block_mass", m.block_mass);
  rep.set("total_mass", m.tower.total_mass());
  rep.set("mean_R_C", m.tower.mean_r0);
  rep.set("mean_V", m.tower.mean_jr0);
  if (!m.neck_monotone) rep.flags.push_back("neck_times_not_monotone");
  if ((m.I_v == 0.0) != (m.sigma_J2 == 0.0)) rep.flags.push_back("degenerate_branch_mismatch");
  auto& t = rep.add_table("neck", {"n", "crossing_R_N", "bouncing_R_N"});
  const auto& fc = m.tower.families[0];
  const auto& fb = m.tower.families[1];
  for (std::int64_t n = 1; n <= m.spec.head; n *= 2)
    t.add({n, fc.neck->at(n), n >= fb.n_min ? fb.neck->at(n) : std::int64_t{0}});
  return rep;
}

stat_report wip_test(const coupled_model& m, const wip_options& o, std::uint64_t seed, exec e) {
  if (o.n < 16 || o.samples < 16 || o.t_grid.empty()) throw config_error("wip_test: need n >= 16 and >= 16 samples");
  for (std::size_t k = 0; k < o.t_grid.size(); ++k)
    if (!(o.t_grid[k] > 0.0 && o.t_grid[k] <= 1.0) || (k && o.t_grid[k] <= o.t_grid[k - 1]))
      throw config_error("wip_test: t_grid increasing in (0, 1]");
  const std::size_t K = o.t_grid.size();
  const double n = static_cast<double>(o.n);
  const double norm = std::sqrt(n * std::log(n));
  const double h = m.spec.h_bar, mu = m.tower.mean_jr0;
  std::vector<double> w(o.samples * K);
  for_each_index(o.samples, e, [&](std::size_t i) {
    tower_orbit x(m.tower, seed, i);
    double clock = 0.0, v = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double T = o.t_grid[k] * n;
      for (;;) {
        const auto& c = x.current();
        const auto& f = m.tower.families[c.family];
        const double end = clock + h * static_cast<double>(f.r(c.n));
        if (end > T) break;
        clock = end;
        v += f.j * static_cast<double>(f.r0(c.n)) - mu * static_cast<double>(f.r(c.n)) / m.R_bar;
        x.step();
      }
      w[i * K + k] = v / norm;
    }
  });
  stat_report rep;
  rep.name = "wip";
  rep.seed = seed;
  rep.set("n", n);
  rep.set("sigma_v2", m.sigma_v2);
  auto& t = rep.add_table("marginals", {"t", "robust_variance", "raw_variance", "target", "ratio", "raw_ratio"});
  double worst = 0.0;
  std::vector<std::vector<double>> cols(K, std::vector<double>(o.samples));
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < o.samples; ++i) cols[k][i] = w[i * K + k];
    const double sh = iqr_sigma(cols[k]);
    const double target = m.sigma_v2 * o.t_grid[k];
    const double ratio = sh * sh / target, raw = variance(cols[k]);
    worst = std::max(worst, std::fabs(ratio - 1.0));
    t.add({o.t_grid[k], sh * sh, raw, target, ratio, raw / target});
  }
  rep.set("max_rel_dev", worst);
  // increments over consecutive grid points: robust covariance from var(X+Y) - var(X-Y)
  auto& ic = rep.add_table("increments", {"t_a", "t_b", "robust_corr", "pearson_corr"});
  double worst_corr = 0.0;
  for (std::size_t k = 0; k + 1 < K; ++k) {
    std::vector<double> a(o.samples), b(o.samples), sp(o.samples), sm(o.samples);
    for (std::size_t i = 0; i < o.samples; ++i) {
      a[i] = cols[k][i] - (k ? cols[k - 1][i] : 0.0);
      b[i] = cols[k + 1][i] - cols[k][i];
      sp[i] = a[i] + b[i];
      sm[i] = a[i] - b[i];
    }
    const double sa = iqr_sigma(a), sb = iqr_sigma(b), p = iqr_sigma(sp), q = iqr_sigma(sm);
    const double rc = (p * p - q * q) / (4.0 * sa * sb);
    const double ma = mean(a), mb = mean(b);
    double cab = 0.0;
    for (std::size_t i = 0; i < o.samples; ++i) cab += (a[i] - ma) * (b[i] - mb);
    cab /= static_cast<double>(o.samples - 1);
    const double pc = cab / std::sqrt(variance(a) * variance(b));
    worst_corr = std::max(worst_corr, std::fabs(rc));
    ic.add({k ? o.t_grid[k - 1] : 0.0, o.t_grid[k + 1], rc, pc});
  }
  rep.set("max_abs_increment_corr", worst_corr);
  return rep;
}

stat_report decay_experiments(const coupled_model& m, const decay_options& o, std::uint64_t seed) {
  if (o.lag_lo < 1 || o.lag_hi < o.lag_lo + 2 || o.batches < 2 ||
      o.orbit_len < o.batches * static_cast<std::uint64_t>(o.lag_hi) * 10)
    throw config_error("decay_experiments: need 1 <= lag_lo < lag_hi and a long enough orbit");
  stat_report rep;
  rep.name = "decay";
  rep.seed = seed;
  const double target_tail = m.tower.tau_bar * m.sigma_R2;
  rep.set("tau_bar_sigma_R2", target_tail);
  auto& tt = rep.add_table("tail", {"n", "tail_mass", "n2_tail", "ratio"});
  for (auto n : o.tail_n) {
    const double q = m.tail_r(n);
    const double nn = static_cast<double>(n);
    tt.add({n, q, nn * nn * q, nn * nn * q / target_tail});
    rep.set("n2_tail_ratio_" + std::to_string(n), nn * nn * q / target_tail);
  }

  // g-orbit: each excursion occupies R steps, the first on the base
  const std::size_t H = static_cast<std::size_t>(o.lag_hi);
  const std::size_t B = o.batches;
  const std::uint64_t per = o.orbit_len / B;
  std::vector<double> pairs(B * (H + 1), 0.0), visits(B, 0.0);
  std::deque<std::uint64_t> recent;
  tower_orbit x(m.tower, seed, 0);
  std::uint64_t t = 0;
  const std::uint64_t end = per * B;
  while (t < end) {
    const std::size_t b = static_cast<std::size_t>(t / per);
    visits[b] += 1.0;
    pairs[b * (H + 1)] += 1.0;
    while (!recent.empty() && t - recent.front() > H) recent.pop_front();
    for (auto s : recent) pairs[b * (H + 1) + (t - s)] += 1.0;
    recent.push_back(t);
    t += static_cast<std::uint64_t>(m.r_of(x.current()));
    x.step();
  }
  const auto f = m.r_pmf(o.lag_hi);
  const auto exact = renewal_covariance(f, m.R_bar, o.lag_hi);
  auto& ct = rep.add_table("autocovariance", {"lag", "cov", "stderr", "exact_cov", "z"});
  std::vector<double> lx, ly, ncov, ncov_exact, ex_y;
  double max_z = 0.0;
  int undersampled = 0;
  const double N = static_cast<double>(per);
  for (std::size_t k = 0; k <= H; ++k) {
    std::vector<double> c(B);
    for (std::size_t b = 0; b < B; ++b) {
      const double mb = visits[b] / N;
      c[b] = pairs[b * (H + 1) + k] / N - mb * mb;
    }
    const double cv = mean(c), se = std::sqrt(variance(c) / static_cast<double>(B));
    const double z = (cv - exact[k]) / se;
    ct.add({static_cast<std::int64_t>(k), cv, se, exact[k], z});
    if (static_cast<std::int64_t>(k) >= o.lag_lo) {
      max_z = std::max(max_z, std::fabs(z));
      if (!(std::fabs(cv) > 2.0 * se)) ++undersampled;
      lx.push_back(static_cast<double>(k));
      ly.push_back(std::fabs(cv));
      ex_y.push_back(std::fabs(exact[k]));
      ncov.push_back(static_cast<double>(k) * std::fabs(cv));
      ncov_exact.push_back(static_cast<double>(k) * exact[k]);
    }
  }
  const auto fit = fit_loglog(lx, ly);
  const auto fit_exact = fit_loglog(lx, ex_y);
  rep.set("slope", fit.slope);
  rep.set("slope_r2", fit.r2);
  rep.set("slope_exact", fit_exact.slope);
  rep.set("max_abs_z_vs_exact", max_z);
  rep.set("undersampled_lags", undersampled);
  if (undersampled) rep.flags.push_back("undersampled_lags");
  // n Cov as the fixed-slope -1 intercept over the lag range
  const double nc = geometric_mean(ncov), nc_exact = geometric_mean(ncov_exact);
  const double integral = 1.0 / m.R_bar;  // mu(base) for both v and w
  const double target = m.tower.tau_bar * m.sigma_R2 * integral * integral;
  rep.set("n_cov", nc);
  rep.set("n_cov_exact", nc_exact);
  rep.set("n_cov_target", target);
  rep.set("n_cov_ratio", nc / target);
  rep.set("renewal_constant", m.sigma_R2 / (m.R_bar * m.R_bar * m.R_bar));
  rep.set("n_cov_ratio_renewal", nc / (m.sigma_R2 / (m.R_bar * m.R_bar * m.R_bar)));
  rep.set("orbit_len", static_cast<double>(end));
  rep.set("R_bar", m.R_bar);
  return rep;
}

}  // namespace flatcyl
