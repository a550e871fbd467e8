#include "flatcyl/tower.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/polygamma.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include "flatcyl/errors.hpp"
#include "flatcyl/flux.hpp"
#include "flatcyl/stats.hpp"

namespace flatcyl {

namespace {

constexpr double pi = std::numbers::pi;

// sum_{k >= N} k^-3 and k^-2
double hurwitz3(double N) { return -0.5 * boost::math::polygamma(2, N); }
double hurwitz2(double N) { return boost::math::polygamma(1, N); }

// 1 - cos atan(t) without cancellation
double one_minus_cos_atan(double t) {
  const double r = std::sqrt(1.0 + t * t);
  return t * t / (r * (1.0 + r));
}

// R_C for tan(psi~) = t, at least `at_least`
std::int64_t winding_index(double L, double t, std::int64_t at_least) {
  const double q = L / (pi * t);
  std::int64_t n = std::max<std::int64_t>(at_least, static_cast<std::int64_t>(std::floor(q)));
  while (t <= L / ((n + 1.0) * pi)) ++n;
  while (n > at_least && t > L / (static_cast<double>(n) * pi)) --n;
  return n;
}

std::int64_t geometric0(double rho, engine& g) {
  return static_cast<std::int64_t>(std::floor(std::log(open_uniform(g)) / std::log(rho)));
}

}  // namespace

double cell_family::pmf(std::int64_t n) const {
  if (n < n_min) return 0.0;
  const double x = static_cast<double>(n);
  switch (kind) {
    case law::point: return n == n_min ? point_mass : 0.0;
    case law::inverse_cube: return 2.0 * sigma2 / (x * x * x);
    case law::winding: return n > std::numeric_limits<int>::max() ? 0.0 : exact_tail(L, static_cast<int>(n)) * scale;
    case law::band: return scale * (2.0 * x + 1.0) / (x * x * (x + 1.0) * (x + 1.0));
  }
  return 0.0;
}

double cell_family::tail(std::int64_t n) const {
  const std::int64_t from = std::max(n + 1, n_min);  // first index counted
  const double N = static_cast<double>(from);
  switch (kind) {
    case law::point: return n < n_min ? point_mass : 0.0;
    case law::inverse_cube: return 2.0 * sigma2 * hurwitz3(N);
    case law::winding: return scale * total_flux * one_minus_cos_atan(L / (N * pi));
    case law::band: return scale / (N * N);
  }
  return 0.0;
}

std::int64_t cell_family::draw_above(std::int64_t above, engine& g) const {
  const std::int64_t a = std::max(above, n_min - 1) + 1;  // smallest admissible index
  const double A = static_cast<double>(a);
  switch (kind) {
    case law::point: return n_min;
    case law::band: return static_cast<std::int64_t>(std::floor(A / std::sqrt(open_uniform(g))));
    case law::inverse_cube: {
      // proposal P(N >= m) = (a/m)^2; target ratio (N+1)^2 / (N (2N+1)) is decreasing
      const double top = (A + 1.0) * (A + 1.0) / (A * (2.0 * A + 1.0));
      for (;;) {
        const auto N = static_cast<std::int64_t>(std::floor(A / std::sqrt(open_uniform(g))));
        const double x = static_cast<double>(N);
        if (open_uniform(g) * top <= (x + 1.0) * (x + 1.0) / (x * (2.0 * x + 1.0))) return N;
      }
    }
    case law::winding: {
      // 1 - cos psi~ is uniform under the flux measure
      const double v = one_minus_cos_atan(L / (A * pi)) * open_uniform(g);
      const double t = std::sqrt(v * (2.0 - v)) / (1.0 - v);
      return winding_index(L, t, a);
    }
  }
  return n_min;
}

std::int64_t cell_family::r(std::int64_t n) const {
  const std::int64_t extra = neck ? neck->at(n) : 0;
  return r0_zero ? std::max<std::int64_t>(1, extra) : n + extra;
}

cell_sampler::cell_sampler(const std::vector<cell_family>& f, std::int64_t head) {
  std::vector<double> w;
  for (std::uint32_t i = 0; i < f.size(); ++i) {
    if (f[i].kind == cell_family::law::point) {
      atom_.push_back({i, f[i].n_min});
      is_tail_.push_back(0);
      w.push_back(f[i].point_mass);
      continue;
    }
    const std::int64_t hi = std::max(head, f[i].n_min);
    for (std::int64_t n = f[i].n_min; n <= hi; ++n) {
      atom_.push_back({i, n});
      is_tail_.push_back(0);
      w.push_back(f[i].pmf(n));
    }
    atom_.push_back({i, hi});
    is_tail_.push_back(1);
    w.push_back(f[i].tail(hi));
  }
  // Vose alias construction
  const std::size_t K = w.size();
  double total = 0.0;
  for (double x : w) total += x;
  if (!(total > 0.0)) throw error("cell_sampler: no mass");
  prob_.assign(K, 0.0);
  alias_.assign(K, 0);
  std::vector<double> scaled(K);
  std::vector<std::uint32_t> small, large;
  for (std::size_t k = 0; k < K; ++k) {
    scaled[k] = w[k] * static_cast<double>(K) / total;
    (scaled[k] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(k));
  }
  while (!small.empty() && !large.empty()) {
    const auto s = small.back(), l = large.back();
    small.pop_back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (auto k : large) prob_[k] = 1.0, alias_[k] = k;
  for (auto k : small) prob_[k] = 1.0, alias_[k] = k;
}

tower_cell cell_sampler::draw(const std::vector<cell_family>& f, engine& g) const {
  const double x = open_uniform(g) * static_cast<double>(prob_.size());
  auto k = static_cast<std::size_t>(x);
  if (k >= prob_.size()) k = prob_.size() - 1;
  if (x - static_cast<double>(k) >= prob_[k]) k = alias_[k];
  if (!is_tail_[k]) return atom_[k];
  const auto& a = atom_[k];
  return {a.family, f[a.family].draw_above(a.n, g)};
}

double tower_model::total_mass() const {
  double m = 0.0;
  for (const auto& f : families) m += f.mass();
  return m;
}

double tower_model::joint_pmf(std::int64_t n, double j) const {
  double base = 0.0, base_j = 0.0;
  for (const auto& f : families) {
    if (f.j != j) continue;
    base_j += f.mass();
    if (f.r0_zero) {
      if (n == 0) base += f.mass();
    } else {
      base += f.pmf(n);
    }
  }
  return base / tau_bar + (n == 1 ? (tau_bar - 1.0) / tau_bar * base_j : 0.0);
}

double tower_model::pmf_r0(std::int64_t n) const {
  double base = 0.0;
  for (const auto& f : families) {
    if (f.r0_zero) {
      if (n == 0) base += f.mass();
    } else {
      base += f.pmf(n);
    }
  }
  return base / tau_bar + (n == 1 ? (tau_bar - 1.0) / tau_bar : 0.0);
}

double tower_model::tail_r0(std::int64_t n) const {
  double base = 0.0;
  for (const auto& f : families) {
    if (f.r0_zero) {
      if (n < 0) base += f.mass();
    } else {
      base += f.tail(n);
    }
  }
  return base / tau_bar + (n < 1 ? (tau_bar - 1.0) / tau_bar : 0.0);
}

std::vector<double> tower_model::base_return_probabilities(std::int64_t n_max) const {
  std::vector<double> u(static_cast<std::size_t>(n_max + 1), 0.0);
  u[0] = 1.0;
  if (tau == tau_mode::one) {
    std::fill(u.begin(), u.end(), 1.0);
    return u;
  }
  // heights 1 + Geometric0(rho): P(tau = t) = (1 - rho) rho^(t-1)
  for (std::int64_t n = 1; n <= n_max; ++n) {
    double s = 0.0, q = 1.0 - rho;
    for (std::int64_t t = 1; t <= n; ++t, q *= rho) s += q * u[static_cast<std::size_t>(n - t)];
    u[static_cast<std::size_t>(n)] = s;
  }
  return u;
}

namespace {

// E[R0 1{family}] exactly
double family_mean_r0(const cell_family& f) {
  if (f.r0_zero) return 0.0;
  switch (f.kind) {
    case cell_family::law::point: return static_cast<double>(f.n_min) * f.point_mass;
    case cell_family::law::inverse_cube: return 2.0 * f.sigma2 * hurwitz2(static_cast<double>(f.n_min));
    case cell_family::law::band: {
      // sum_{n >= n_min} P(index >= n)
      double s = static_cast<double>(f.n_min - 1) * f.mass();
      return s + f.scale * hurwitz2(static_cast<double>(f.n_min));
    }
    case cell_family::law::winding: {
      // sum_{n >= 1} P(index >= n) = sum_{m >= 0} tail(m); tail(m) ~ c / (m+1)^2
      const std::int64_t N = 1 << 20;
      double s = 0.0;
      for (std::int64_t m = N - 1; m >= 0; --m) s += f.tail(m);
      const double k = f.L / pi;
      return s + f.scale * total_flux * k * k / 2.0 * hurwitz2(static_cast<double>(N + 1));
    }
  }
  return 0.0;
}

// E[R 1{family}]: exact through the neck table, then the power law
double family_mean_r(const cell_family& f) {
  if (!f.neck) return f.r0_zero ? f.mass() : family_mean_r0(f);
  if (f.kind == cell_family::law::point) return static_cast<double>(f.r(f.n_min)) * f.point_mass;
  const auto& t = f.neck->table;
  const std::int64_t N = static_cast<std::int64_t>(t.size());
  double s = 0.0;
  for (std::int64_t n = f.n_min; n < N; ++n) s += f.pmf(n) * static_cast<double>(f.r(n) - f.r0(n));
  const double last = static_cast<double>(t.back()), nl = static_cast<double>(N - 1);
  const std::int64_t M = std::int64_t{1} << 22;
  double rest = 0.0;
  for (std::int64_t n = M; n >= N; --n) {
    const double x = static_cast<double>(n);
    const double extra = last * std::pow(x / nl, f.neck->growth);
    rest += f.pmf(n) * (f.r0_zero ? std::max(1.0, extra) : extra);
  }
  return s + rest + family_mean_r0(f);
}

}  // namespace

void tower_model::prepare() {
  sampler = cell_sampler(families, head);
  double r0 = 0.0, jr0 = 0.0, r = 0.0, base_j = 0.0;
  for (const auto& f : families) {
    const double m0 = family_mean_r0(f);
    r0 += m0;
    jr0 += f.j * m0;
    r += family_mean_r(f);
    base_j += f.j * f.mass();
  }
  const double lv = (tau_bar - 1.0) / tau_bar;
  mean_r0 = r0 / tau_bar + lv;
  mean_jr0 = jr0 / tau_bar + lv * base_j;
  mean_r = r / tau_bar + lv;
}

double feasibility_bound(double tau_bar) {
  return 1.0 / (2.0 * tau_bar * (boost::math::zeta(3.0) - 1.0));
}

tower_model build_tower(const tower_spec& s) {
  if (s.alphas.empty() || s.alphas.size() != s.sigmas2.size())
    throw config_error("build_tower: alphas and sigmas2 must be nonempty and of equal length");
  double total = 0.0;
  for (double v : s.sigmas2) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw config_error("build_tower: sigma^2 must be finite and >= 0");
    total += v;
  }
  if (!(total > 0.0)) throw config_error("build_tower: sum of sigma^2 must be positive");
  if (s.head < 2) throw config_error("build_tower: head >= 2");
  tower_model m;
  m.tau = s.tau;
  m.head = s.head;
  m.alphas = s.alphas;
  m.sigmas2 = s.sigmas2;
  if (s.tau == tau_mode::geometric) {
    if (!(s.rho > 0.0 && s.rho < 1.0)) throw config_error("build_tower: rho must lie in (0, 1)");
    m.rho = s.rho;
    m.tau_bar = 1.0 / (1.0 - s.rho);
  }
  const double bound = feasibility_bound(m.tau_bar);
  if (total > bound)
    throw infeasible_error("build_tower: sigma_total^2 = " + format_double(total) + " exceeds the feasibility bound " +
                           format_double(bound));
  // base law: mu_Delta = mu_base / tau_bar at level 0
  const double z3 = boost::math::zeta(3.0) - 1.0;
  const double residual = 1.0 - 2.0 * m.tau_bar * total * z3;
  for (std::size_t i = 0; i < s.alphas.size(); ++i) {
    if (s.sigmas2[i] == 0.0) continue;
    cell_family f;
    f.kind = cell_family::law::inverse_cube;
    f.name = "cube_" + std::to_string(i);
    f.j = s.alphas[i];
    f.n_min = 2;
    f.sigma2 = m.tau_bar * s.sigmas2[i];
    m.families.push_back(f);
    cell_family r;
    r.kind = cell_family::law::point;
    r.name = "residual_" + std::to_string(i);
    r.j = s.alphas[i];
    r.n_min = 1;
    r.point_mass = std::max(0.0, residual) * s.sigmas2[i] / total;
    m.families.push_back(r);
    m.sigma_J2 += s.alphas[i] * s.alphas[i] * s.sigmas2[i];
  }
  m.prepare();
  return m;
}

double exact_second_moment(const tower_model& m, std::int64_t p) {
  if (p < 1) throw config_error("exact_second_moment: p >= 1");
  // each distinct alpha once, with its families and the unit tower levels
  struct term {
    double a2, levels;
    std::vector<const cell_family*> fams;
  };
  std::vector<term> terms;
  for (std::size_t i = 0; i < m.alphas.size(); ++i) {
    if (std::find(m.alphas.begin(), m.alphas.begin() + static_cast<std::ptrdiff_t>(i), m.alphas[i]) !=
        m.alphas.begin() + static_cast<std::ptrdiff_t>(i))
      continue;
    term t{m.alphas[i] * m.alphas[i], 0.0, {}};
    for (const auto& f : m.families)
      if (f.j == m.alphas[i] && !f.r0_zero) t.fams.push_back(&f);
    t.levels = m.joint_pmf(1, m.alphas[i]);
    for (const auto* f : t.fams) t.levels -= f->pmf(1) / m.tau_bar;
    terms.push_back(std::move(t));
  }
  double s = 0.0;
  for (std::int64_t n = p; n >= 1; --n) {
    const double x = static_cast<double>(n);
    double w = 0.0;
    for (const auto& t : terms) {
      double q = n == 1 ? t.levels : 0.0;
      for (const auto* f : t.fams) q += f->pmf(n) / m.tau_bar;
      w += t.a2 * q;
    }
    s += x * x * w;
  }
  return s;
}

const char* to_string(observable o) {
  switch (o) {
    case observable::jr0: return "JR0";
    case observable::r0: return "R0";
    case observable::r: return "R";
    case observable::indicator_base: return "indicator_base";
  }
  return "?";
}

double observable_mean(const tower_model& m, observable o) {
  switch (o) {
    case observable::jr0: return m.mean_jr0;
    case observable::r0: return m.mean_r0;
    case observable::r: return m.mean_r;
    case observable::indicator_base: return 1.0 / m.tau_bar;
  }
  return 0.0;
}

namespace {

// uncentered value
inline double raw_value(const tower_model& m, observable o, const tower_cell& c, std::int64_t level) {
  const auto& f = m.families[c.family];
  switch (o) {
    case observable::jr0: return level == 0 ? f.j * static_cast<double>(f.r0(c.n)) : f.j;
    case observable::r0: return level == 0 ? static_cast<double>(f.r0(c.n)) : 1.0;
    case observable::r: return level == 0 ? static_cast<double>(f.r(c.n)) : 1.0;
    case observable::indicator_base: return level == 0 ? 1.0 : 0.0;
  }
  return 0.0;
}

}  // namespace

double observable_value(const tower_model& m, observable o, const tower_cell& c, std::int64_t level) {
  return raw_value(m, o, c, level) - observable_mean(m, o);
}

tower_orbit::tower_orbit(const tower_model& m, std::uint64_t seed, std::uint64_t stream)
    : m_(&m), g_(make_engine(seed, tag::tower, stream)) {
  new_column(true);
}

void tower_orbit::new_column(bool stationary) {
  cell_ = m_->draw(g_);
  level_ = 0;
  height_ = 1;
  if (m_->tau == tau_mode::one) return;
  if (stationary) {
    // size-biased height 1 + G + G', uniform level
    height_ = 1 + geometric0(m_->rho, g_) + geometric0(m_->rho, g_);
    level_ = std::min<std::int64_t>(height_ - 1,
                                    static_cast<std::int64_t>(open_uniform(g_) * static_cast<double>(height_)));
  } else {
    height_ = 1 + geometric0(m_->rho, g_);
  }
}

void tower_orbit::step() {
  if (++level_ >= height_) new_column(false);
}

birkhoff_sums simulate(const tower_model& m, observable o, const std::vector<std::int64_t>& checkpoints,
                       std::size_t samples, std::uint64_t seed, exec e) {
  if (checkpoints.empty() || !std::is_sorted(checkpoints.begin(), checkpoints.end()) || checkpoints.front() < 1)
    throw config_error("simulate: checkpoints must be increasing and >= 1");
  birkhoff_sums out;
  out.checkpoints = checkpoints;
  out.samples = samples;
  out.values.assign(samples * checkpoints.size(), 0.0);
  const double mu = observable_mean(m, o);
  for_each_index(samples, e, [&](std::size_t i) {
    tower_orbit x(m, seed, i);
    double s = 0.0;
    std::size_t k = 0;
    for (std::int64_t t = 1; k < checkpoints.size(); ++t) {
      s += raw_value(m, o, x.current(), x.level()) - mu;
      if (t == checkpoints[k]) out.values[i * checkpoints.size() + k++] = s;
      x.step();
    }
  });
  return out;
}

stat_report nonstandard_clt_test(const tower_model& m, observable o, double target_variance, const clt_options& c,
                                 std::uint64_t seed, exec e) {
  if (c.n_grid.empty() || c.samples < 16) throw config_error("nonstandard_clt_test: need n_grid and >= 16 samples");
  for (auto n : c.n_grid)
    if (n < 2) throw config_error("nonstandard_clt_test: n >= 2");
  stat_report rep;
  rep.name = std::string("clt_") + to_string(o);
  rep.seed = seed;
  const bool degenerate = !(target_variance > 0.0);
  rep.set("target_variance", target_variance);
  const std::int64_t n_max = *std::max_element(c.n_grid.begin(), c.n_grid.end());
  std::vector<double> ratio, raw_ratio, ks, sd;
  std::vector<std::vector<cell>> rows;
  double max_abs = 0.0;
  for (std::size_t k = 0; k < c.n_grid.size(); ++k) {
    const std::int64_t n = c.n_grid[k];
    const std::size_t boost = std::max<std::size_t>(1, std::min<std::size_t>(c.max_sample_boost, n_max / n));
    const std::size_t samples = c.samples * boost;
    const auto sums = simulate(m, o, {n}, samples, stream_key(seed, tag::tower, 1000 + k), e);
    const double nn = static_cast<double>(n);
    const double scale = degenerate ? std::sqrt(nn) : std::sqrt(nn * std::log(nn));
    std::vector<double> x(samples);
    for (std::size_t i = 0; i < samples; ++i) {
      x[i] = sums.values[i] / scale;
      max_abs = std::max(max_abs, std::fabs(sums.values[i]));
    }
    const double sh = iqr_sigma(x);
    const double denom = degenerate ? 1.0 : target_variance;
    ratio.push_back(sh * sh / denom);
    raw_ratio.push_back(variance(x) / denom);
    ks.push_back(sh > 0.0 ? ks_normal(x, sh) : 0.0);
    const double ks_t = degenerate ? 0.0 : ks_normal(x, std::sqrt(target_variance));
    rows.push_back({static_cast<std::int64_t>(n), static_cast<std::int64_t>(samples), sh * sh, ratio.back(),
                    raw_ratio.back(), ks.back(), ks_t, ks_critical(samples, 0.05)});
  }
  auto& t = rep.add_table("clt", {"n", "samples", "sigma_hat2", "variance_ratio", "raw_variance_ratio", "ks_distance",
                                  "ks_target", "ks_critical_05"});
  for (auto& r : rows) t.add(std::move(r));
  rep.set("variance_ratio", ratio.back());
  rep.set("raw_variance_ratio", raw_ratio.back());
  rep.set("ks_distance", ks.back());
  rep.set("max_abs_sum", max_abs);
  if (degenerate) {
    rep.flags.push_back("standard_clt_branch");
    rep.set("standard_variance", ratio.back());
  } else {
    bool mono = true;
    for (std::size_t k = 1; k < ratio.size(); ++k)
      mono = mono && std::fabs(ratio[k] - 1.0) <= std::fabs(ratio[k - 1] - 1.0);
    rep.set("deviation_nonincreasing", mono ? 1.0 : 0.0);
  }
  return rep;
}

stat_report pair_condition_check(const tower_model& m, const pair_options& o, std::uint64_t seed) {
  if (o.k_max < 1 || o.n_set.empty() || o.orbit_len < 1000) throw config_error("pair_condition_check: bad options");
  for (auto n : o.n_set)
    if (n < 1) throw config_error("pair_condition_check: n >= 1");
  const std::int64_t n_top = *std::max_element(o.n_set.begin(), o.n_set.end());
  const std::size_t K = static_cast<std::size_t>(o.k_max);
  const std::size_t W = static_cast<std::size_t>(n_top) + 1;
  std::vector<std::uint64_t> counts(o.n_set.size() * K * K, 0);
  std::vector<std::int64_t> ring(W, 0);
  tower_orbit x(m, seed, 0);
  std::uint64_t used = 0;
  for (std::uint64_t t = 0; t < o.orbit_len; ++t) {
    const auto& f = m.families[x.current().family];
    const std::int64_t v = x.level() == 0 ? f.r0(x.current().n) : 1;
    ring[t % W] = v;
    if (t >= static_cast<std::uint64_t>(n_top)) {
      ++used;
      if (v >= 1 && v <= o.k_max)
        for (std::size_t a = 0; a < o.n_set.size(); ++a) {
          const std::int64_t k = ring[(t - static_cast<std::uint64_t>(o.n_set[a])) % W];
          if (k >= 1 && k <= o.k_max)
            ++counts[(a * K + static_cast<std::size_t>(k - 1)) * K + static_cast<std::size_t>(v - 1)];
        }
    }
    x.step();
  }
  stat_report rep;
  rep.name = "pair_condition";
  rep.seed = seed;
  const auto u = m.base_return_probabilities(n_top);
  auto& t = rep.add_table("pairs", {"n", "k", "l", "count", "joint", "bound_ratio", "oracle", "z"});
  double C = 0.0, max_z = 0.0;
  const double N = static_cast<double>(used);
  for (std::size_t a = 0; a < o.n_set.size(); ++a) {
    double Cn = 0.0;
    for (std::int64_t k = 1; k <= o.k_max; ++k)
      for (std::int64_t l = 1; l <= o.k_max; ++l) {
        const auto c = counts[(a * K + static_cast<std::size_t>(k - 1)) * K + static_cast<std::size_t>(l - 1)];
        const double joint = static_cast<double>(c) / N;
        const double ratio = joint * std::pow(static_cast<double>(k * l), o.beta);
        // exact joint where the renewal structure gives it: i.i.d. mode, or both cells on the base
        double oracle = std::numeric_limits<double>::quiet_NaN(), z = oracle;
        if (m.tau == tau_mode::one || (k >= 2 && l >= 2)) {
          oracle = m.pmf_r0(k) * m.pmf_r0(l) * (m.tau == tau_mode::one ? 1.0 : m.tau_bar * u[o.n_set[a]]);
          if (oracle > 0.0) {
            z = (joint - oracle) / std::sqrt(oracle / N);
            if (c >= o.min_count) max_z = std::max(max_z, std::fabs(z));
          }
        }
        if (c >= o.min_count) Cn = std::max(Cn, ratio);
        t.add({o.n_set[a], k, l, static_cast<std::int64_t>(c), joint, ratio, oracle, z});
      }
    rep.set("C_n" + std::to_string(o.n_set[a]), Cn);
    C = std::max(C, Cn);
  }
  rep.set("C", C);
  rep.set("beta", o.beta);
  rep.set("max_abs_z", max_z);
  rep.set("orbit_len", static_cast<double>(o.orbit_len));
  return rep;
}

stat_report adde_correlation(const tower_model& m, const adde_options& o, std::uint64_t seed) {
  if (o.d > o.e || o.d_p > o.e_p || o.n_max < 0 || o.batches < 2 || o.orbit_len < o.batches * 100)
    throw config_error("adde_correlation: need d <= e, d' <= e', n_max >= 0 and enough orbit");
  // conditional means of J R0 on {d <= R0 < e} from the exact law
  auto cond_mean = [&](std::int64_t d, std::int64_t e) {
    double num = 0.0, den = 0.0;
    std::vector<double> js;
    for (const auto& f : m.families)
      if (std::find(js.begin(), js.end(), f.j) == js.end()) js.push_back(f.j);
    for (std::int64_t n = d; n < e; ++n)
      for (double j : js) {
        const double p = m.joint_pmf(n, j);
        num += j * static_cast<double>(n) * p;
        den += p;
      }
    return den > 0.0 ? num / den : 0.0;
  };
  const double ma = cond_mean(o.d, o.e), mb = cond_mean(o.d_p, o.e_p);
  const std::size_t W = static_cast<std::size_t>(o.n_max) + 1;
  const std::size_t B = o.batches;
  const std::uint64_t per = o.orbit_len / B;
  std::vector<double> sums(B * W, 0.0), mean_a(B, 0.0);
  std::vector<double> ring(W, 0.0);
  tower_orbit x(m, seed, 0);
  std::uint64_t t = 0;
  for (std::size_t b = 0; b < B; ++b)
    for (std::uint64_t i = 0; i < per; ++i, ++t) {
      const auto& f = m.families[x.current().family];
      const std::int64_t r0 = x.level() == 0 ? f.r0(x.current().n) : 1;
      const double jr0 = f.j * static_cast<double>(r0);
      const double a = (r0 >= o.d && r0 < o.e) ? jr0 - ma : 0.0;
      const double bv = (r0 >= o.d_p && r0 < o.e_p) ? jr0 - mb : 0.0;
      ring[t % W] = a;
      mean_a[b] += a;
      // pairs (t - n, t): A at t - n, A' at t
      if (bv != 0.0)
        for (std::size_t n = 0; n < W && n <= t; ++n) sums[b * W + n] += ring[(t - n) % W] * bv;
      x.step();
    }
  stat_report rep;
  rep.name = "adde_correlation";
  rep.seed = seed;
  auto& tab = rep.add_table("correlation", {"n", "corr", "stderr"});
  std::vector<double> fx, fy;
  double max_z = 0.0;
  for (std::size_t n = 0; n < W; ++n) {
    std::vector<double> v(B);
    for (std::size_t b = 0; b < B; ++b) v[b] = sums[b * W + n] / static_cast<double>(per);
    const double c = mean(v), se = std::sqrt(variance(v) / static_cast<double>(B));
    tab.add({static_cast<std::int64_t>(n), c, se});
    if (n >= 1) {
      max_z = std::max(max_z, se > 0.0 ? std::fabs(c) / se : 0.0);
      if (std::fabs(c) > 3.0 * se && c != 0.0) {
        fx.push_back(static_cast<double>(n));
        fy.push_back(std::log(std::fabs(c)));
      }
    }
  }
  std::vector<double> ma_v(mean_a);
  for (auto& v : ma_v) v /= static_cast<double>(per);
  rep.set("mean_A", mean(ma_v));
  rep.set("mean_A_stderr", std::sqrt(variance(ma_v) / static_cast<double>(B)));
  rep.set("max_abs_z_lag_ge1", max_z);
  rep.set("significant_lags", static_cast<double>(fx.size()));
  if (fx.size() >= 3) {
    const auto fit = fit_line(fx, fy);
    rep.set("gamma_hat", std::exp(fit.slope));
    rep.set("gamma_fit_r2", fit.r2);
  } else {
    rep.flags.push_back("no_decay_to_fit");
  }
  return rep;
}

}  // namespace flatcyl
