#include "flatcyl/flux.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <boost/math/distributions/binomial.hpp>

#include "flatcyl/errors.hpp"
#include "flatcyl/rng.hpp"
#include "flatcyl/stats.hpp"
#include "flatcyl/transit.hpp"

namespace flatcyl {

namespace {

constexpr double pi = std::numbers::pi;

// tan of the acute reference angle from cos psi, exact near the tangency
double tan_from_cos(double u) {
  const double a = std::fabs(u);
  return std::sqrt((1.0 - a) * (1.0 + a)) / a;
}

// 1/sqrt(1+t^2), the cosine of atan(t)
double cos_atan(double t) { return 1.0 / std::sqrt(1.0 + t * t); }

}  // namespace

flux_sample flux_draw(std::uint64_t key, std::uint64_t index) {
  const double u_side = hashed_uniform(key, 3 * index);
  const double u_theta = hashed_uniform(key, 3 * index + 1);
  const double u_cos = hashed_uniform(key, 3 * index + 2);
  flux_sample x{};
  x.side = u_side < 0.5 ? -1 : 1;
  x.theta = 2.0 * pi * u_theta;
  x.cos_psi = 2.0 * u_cos - 1.0;  // inverse CDF of sin(psi)/2 on (0, pi)
  x.psi = std::acos(x.cos_psi);
  return x;
}

std::vector<flux_sample> sample_flux(std::uint64_t seed, std::size_t count, exec e) {
  if (count == 0) throw config_error("sample_flux: count must be positive");
  const auto key = stream_key(seed, tag::flux, 0);
  std::vector<flux_sample> out(count);
  for_each_index(count, e, [&](std::size_t i) { out[i] = flux_draw(key, i); });
  return out;
}

int winding_count_tan(double L, double t) {
  if (!(t > 0.0)) throw domain_error("winding_count: tangential direction");
  if (t > L / pi) return 0;
  const double q = L / (pi * t);
  if (q > static_cast<double>(std::numeric_limits<int>::max() - 1)) throw domain_error("winding_count: overflow");
  int n = std::max(1, static_cast<int>(std::floor(q)));
  // settle the half-open boundaries with the same expression the tests use
  while (t <= L / ((n + 1) * pi)) ++n;
  while (n > 1 && t > L / (n * pi)) --n;
  return n;
}

int winding_count(double L, double psi) {
  const double pt = psi_tilde(psi);
  if (pt == 0.0) throw domain_error("winding_count: tangential direction");
  return winding_count_tan(L, std::tan(pt));
}

double exact_tail(double L, int n) {
  if (n < 1) throw domain_error("exact_tail: n >= 1");
  const double nn = n, k = L / pi;
  const double t0 = k / nn, t1 = k / (nn + 1.0);
  const double r0 = std::sqrt(1.0 + t0 * t0), r1 = std::sqrt(1.0 + t1 * t1);
  // cos atan(t1) - cos atan(t0) without cancellation
  const double dt2 = k * k * (2.0 * nn + 1.0) / (nn * nn * (nn + 1.0) * (nn + 1.0));
  return total_flux * dt2 / (r0 * r1 * (r0 + r1));
}

double exact_tail_beyond(double L, int n) {
  if (n < 0) throw domain_error("exact_tail_beyond: n >= 0");
  const double t = L / ((n + 1.0) * pi);
  const double r = std::sqrt(1.0 + t * t);
  return total_flux * t * t / (r * (1.0 + r));
}

double nonwinding_mass(double L) { return total_flux * cos_atan(L / pi); }

double sigma_R_sq(double L, double A_total) {
  if (!(A_total > 0.0)) throw config_error("sigma_R_sq: A_total must be positive");
  return 4.0 * L * L / (A_total * pi);
}

winding_histogram mc_winding_histogram(double L, std::uint64_t samples, std::uint64_t seed, int n_max, exec e) {
  if (n_max < 1) throw config_error("mc_winding_histogram: n_max >= 1");
  constexpr std::uint64_t block = 1 << 16;
  const std::uint64_t blocks = (samples + block - 1) / block;
  const std::size_t width = static_cast<std::size_t>(n_max) + 2;
  std::vector<std::uint64_t> partial(blocks * width, 0);
  const auto key = stream_key(seed, tag::flux, 1);
  for_each_index(blocks, e, [&](std::size_t b) {
    std::uint64_t* h = partial.data() + b * width;
    const std::uint64_t end = std::min(samples, (b + 1) * block);
    for (std::uint64_t i = b * block; i < end; ++i) {
      const auto x = flux_draw(key, i);
      if (x.cos_psi == 0.0) {
        ++h[0];
        continue;
      }
      const int n = winding_count_tan(L, tan_from_cos(x.cos_psi));
      ++h[std::min<std::size_t>(n, width - 1)];
    }
  });
  winding_histogram out;
  out.samples = samples;
  out.counts.assign(width, 0);
  for (std::uint64_t b = 0; b < blocks; ++b)
    for (std::size_t k = 0; k < width; ++k) out.counts[k] += partial[b * width + k];
  return out;
}

stat_report tail_law_report(double L, int n_lo, int n_hi, std::uint64_t mc_samples, int mc_n_max, std::uint64_t seed,
                            exec e) {
  if (n_lo < 1 || n_hi < n_lo) throw config_error("tail_law_report: need 1 <= n_lo <= n_hi");
  stat_report rep;
  rep.name = "tails";
  rep.seed = seed;
  const double lim = 8.0 * L * L / pi;
  auto& law = rep.add_table("tail_law", {"n", "exact_mass", "n3_mass", "n3_ratio"});
  double worst = 0.0;
  for (int n = n_lo; n <= n_hi; ++n) {
    const double m = exact_tail(L, n);
    const double n3 = std::pow(static_cast<double>(n), 3) * m;
    worst = std::max(worst, std::fabs(n3 / lim - 1.0));
    law.add({static_cast<std::int64_t>(n), m, n3, n3 / lim});
  }
  rep.set("n3_limit", lim);
  rep.set("max_rel_dev_n3", worst);

  // conservation: partial sum + closed-form remainder + R_C = 0 mass
  double sum = 0.0;
  for (int n = 1; n <= n_hi; ++n) sum += exact_tail(L, n);
  rep.set("conservation_error", std::fabs(sum + exact_tail_beyond(L, n_hi) + nonwinding_mass(L) - total_flux));

  if (mc_samples > 0) {
    const auto h = mc_winding_histogram(L, mc_samples, seed, mc_n_max, e);
    const double N = static_cast<double>(h.samples);
    auto& mc = rep.add_table("histogram", {"n", "exact_mass", "mc_mass", "mc_stderr", "count", "z"});
    double max_z = 0.0;
    int violations = 0;
    for (int n = 1; n <= mc_n_max; ++n) {
      const double m = exact_tail(L, n);
      const double p = m / total_flux;
      const double sd = std::sqrt(N * p * (1.0 - p));
      const double c = static_cast<double>(h.counts[n]);
      const double z = (c - N * p) / sd;
      max_z = std::max(max_z, std::fabs(z));
      if (std::fabs(z) > 3.0) ++violations;
      mc.add({static_cast<std::int64_t>(n), m, total_flux * c / N, total_flux * sd / N,
              static_cast<std::int64_t>(h.counts[n]), z});
    }
    rep.set("mc_samples", N);
    rep.set("mc_max_abs_z", max_z);
    rep.set("mc_bins_beyond_3sigma", violations);
    // the chance that all bins pass at 3 sigma if the law is exact
    double p_all = 1.0;
    for (int n = 1; n <= mc_n_max; ++n) {
      const double p = exact_tail(L, n) / total_flux;
      const double mu = N * p, sd = std::sqrt(N * p * (1.0 - p));
      const double lo = std::ceil(mu - 3.0 * sd), hi = std::floor(mu + 3.0 * sd);
      const boost::math::binomial_distribution<double> law(N, p);
      const double acc = boost::math::cdf(law, hi) - (lo >= 1.0 ? boost::math::cdf(law, lo - 1.0) : 0.0);
      p_all *= std::min(1.0, acc);
    }
    rep.set("mc_pass_probability_under_exact_law", p_all);
    rep.set("mc_nonwinding_z",
            (static_cast<double>(h.counts[0]) - N * nonwinding_mass(L) / total_flux) /
                std::sqrt(N * nonwinding_mass(L) / total_flux * (1.0 - nonwinding_mass(L) / total_flux)));
  }
  return rep;
}

stat_report neck_tail_report(const profile_params& p, std::size_t samples, std::uint64_t seed,
                             const neck_tail_options& o, exec e) {
  if (samples < 1000) throw config_error("neck_tail_report: too few samples");
  const double a = xi_eps1(p);
  if (!(o.window > 0.0 && o.window < std::min(1.0, a - 1.0)))
    throw config_error("neck_tail_report: window must lie inside both kinds");
  std::vector<double> times(samples);
  for_each_index(samples, e, [&](std::size_t i) {
    const auto key = stream_key(seed, tag::neck, i);
    // the flux density is uniform in c on the entry section; resample within tol_c of |c| = 1
    for (std::uint64_t k = 0;; ++k) {
      const double x = (2.0 * hashed_uniform(key, k) - 1.0) * o.window;
      if (std::fabs(x) <= 1e-12) continue;
      const clairaut_offset off{x > 0 ? geodesic_kind::bouncing : geodesic_kind::crossing, std::fabs(x)};
      times[i] = 2.0 * excursion_of(p, off, o.quad_tol).upsilon1;
      break;
    }
  });
  stat_report rep;
  rep.name = "neck_tail";
  rep.seed = seed;
  const auto fit = survival_exponent(times, o.s_lo, o.s_hi);
  const double target = 2.0 * p.r / (p.r - 2.0);
  rep.set("r", p.r);
  rep.set("fitted_exponent", fit.exponent);
  rep.set("target_exponent", target);
  rep.set("fit_r2", fit.r2);
  rep.set("fit_points", static_cast<double>(fit.points));
  // neck time is in L^p for p below the exponent; the margin above p = 2
  rep.set("lp_margin", fit.exponent - 2.0);
  double m22 = 0.0;
  for (double t : times) m22 += std::pow(t, 2.2);
  rep.set("moment_p2_2", m22 / static_cast<double>(samples));
  // survival curve on a log grid for plotting
  std::vector<double> sorted(times);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  auto& t = rep.add_table("survival", {"upsilon_n", "survival"});
  const double n = static_cast<double>(samples);
  for (double s = 1.0 / n; s <= 1.0; s *= 1.25) {
    const auto i = static_cast<std::size_t>(std::ceil(s * n)) - 1;
    t.add({sorted[i], (static_cast<double>(i) + 0.5) / n});
  }
  return rep;
}

}  // namespace flatcyl
