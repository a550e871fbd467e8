#include "flatcyl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "flatcyl/errors.hpp"

namespace flatcyl {

line_fit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw error("fit_line: size mismatch");
  if (n < 3) throw error("fit_line: degenerate fit, fewer than 3 points");
  const double mx = mean(x), my = mean(y);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0) throw error("fit_line: degenerate abscissae");
  const double slope = sxy / sxx;
  const double r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
  return {slope, my - slope * mx, r2, n};
}

line_fit fit_loglog(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return fit_line(lx, ly);
}

double mean(std::span<const double> v) {
  if (v.empty()) return std::nan("");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
  if (v.size() < 2) return std::nan("");
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double geometric_mean(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += std::log(x);
  return std::exp(s / static_cast<double>(v.size()));
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (pos - static_cast<double>(i)) * (v[i + 1] - v[i]);
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

double iqr_sigma(std::span<const double> v) {
  std::vector<double> w(v.begin(), v.end());
  std::sort(w.begin(), w.end());
  auto q = [&](double p) {
    const double pos = p * static_cast<double>(w.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    return i + 1 >= w.size() ? w.back() : w[i] + (pos - static_cast<double>(i)) * (w[i + 1] - w[i]);
  };
  return (q(0.75) - q(0.25)) / 1.3489795003921634;
}

double median_of_means(std::span<const double> v, std::size_t blocks) {
  if (v.size() < blocks) return median(std::vector<double>(v.begin(), v.end()));
  const std::size_t len = v.size() / blocks;
  std::vector<double> means;
  for (std::size_t b = 0; b < blocks; ++b) means.push_back(mean(v.subspan(b * len, len)));
  return median(means);
}

double normal_cdf(double x, double sigma) { return 0.5 * std::erfc(-x / (sigma * std::sqrt(2.0))); }

double ks_normal(std::vector<double> v, double sigma) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = normal_cdf(v[i], sigma);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

double ks_uniform01(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    d = std::max({d, v[i] - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - v[i]});
  return d;
}

double ks_critical(std::size_t n, double alpha) {
  // Kolmogorov limit quantile with Stephens' finite-n correction
  const double c = std::sqrt(-0.5 * std::log(0.5 * alpha));
  const double rn = std::sqrt(static_cast<double>(n));
  return c / (rn + 0.12 + 0.11 / rn);
}

tail_fit survival_exponent(std::vector<double> v, double s_lo, double s_hi) {
  std::sort(v.begin(), v.end(), std::greater<>());
  const double n = static_cast<double>(v.size());
  std::vector<double> lx, ls;
  // S(v[i]) estimated as (i + 1/2)/n at the i-th largest value
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double s = (static_cast<double>(i) + 0.5) / n;
    if (s < s_lo || s > s_hi) continue;
    if (i > 0 && v[i] == v[i - 1]) continue;
    lx.push_back(std::log(v[i]));
    ls.push_back(std::log(s));
  }
  if (lx.size() < 3) throw error("survival_exponent: insufficient tail samples");
  const auto f = fit_line(lx, ls);
  return {-f.slope, f.r2, f.n};
}

}  // namespace flatcyl
