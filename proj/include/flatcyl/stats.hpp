#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace flatcyl {

struct line_fit {
  double slope, intercept, r2;
  std::size_t n;
};
// Least squares y = slope*x + intercept; throws on fewer than 3 points.
line_fit fit_line(std::span<const double> x, std::span<const double> y);
line_fit fit_loglog(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> v);
double variance(std::span<const double> v);  // unbiased
double geometric_mean(std::span<const double> v);
double quantile(std::vector<double> v, double q);  // linear interpolation, copies
double median(std::vector<double> v);

// Scale of the Gaussian core: IQR / (2 * 0.6744897...).
double iqr_sigma(std::span<const double> v);

double median_of_means(std::span<const double> v, std::size_t blocks = 16);

double normal_cdf(double x, double sigma = 1.0);
// sup |F_n - Phi(./sigma)|
double ks_normal(std::vector<double> v, double sigma);
double ks_uniform01(std::vector<double> v);
// one-sample KS critical value at level alpha (asymptotic Kolmogorov law)
double ks_critical(std::size_t n, double alpha);

// Fitted survival exponent: slope of log S(x) vs log x where S is the
// empirical survival function restricted to S in [s_lo, s_hi].
struct tail_fit {
  double exponent;
  double r2;
  std::size_t points;
};
tail_fit survival_exponent(std::vector<double> v, double s_lo, double s_hi);

}  // namespace flatcyl
