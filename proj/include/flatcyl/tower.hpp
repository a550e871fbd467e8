#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "flatcyl/parallel.hpp"
#include "flatcyl/report.hpp"
#include "flatcyl/rng.hpp"

namespace flatcyl {

// Return-time contribution of the neck for cells of one family, by index n.
struct neck_law {
  std::vector<std::int64_t> table;                  // table[n] for n < size
  std::function<std::int64_t(std::int64_t)> beyond;  // pure, thread safe
  double growth = 0.0;  // exponent of the large-n power law, for tail means
  std::int64_t at(std::int64_t n) const {
    return n < static_cast<std::int64_t>(table.size()) ? table[static_cast<std::size_t>(n)] : beyond(n);
  }
};

// A family of base cells sharing J. Cells are indexed by n >= n_min and carry
// R0 = n (or 0 for neck-only families) and R = R0 + neck(n).
struct cell_family {
  enum class law { point, inverse_cube, winding, band };
  law kind = law::point;
  std::string name;
  double j = 0.0;
  std::int64_t n_min = 1;  // point: the value
  bool r0_zero = false;    // neck-only cells: R0 = 0
  double sigma2 = 0.0;     // inverse_cube: pmf 2 sigma2 n^-3
  double L = 0.0;          // winding: pmf exact_tail(L, n) * scale
  double scale = 0.0;      // winding, band: mass factor; band pmf scale (1/n^2 - 1/(n+1)^2)
  double point_mass = 0.0;
  std::shared_ptr<const neck_law> neck;

  double pmf(std::int64_t n) const;
  double mass() const { return tail(n_min - 1); }
  double tail(std::int64_t n) const;  // family mass on cells with index > n
  // exact draw conditioned on index > above
  std::int64_t draw_above(std::int64_t above, engine& g) const;
  std::int64_t r0(std::int64_t n) const { return r0_zero ? 0 : n; }
  std::int64_t r(std::int64_t n) const;
};

struct tower_cell {
  std::uint32_t family;
  std::int64_t n;
};

enum class tau_mode { one, geometric };

// Alias sampler over head atoms (family, n <= head) plus one tail atom per family.
class cell_sampler {
 public:
  cell_sampler() = default;
  cell_sampler(const std::vector<cell_family>& f, std::int64_t head);
  tower_cell draw(const std::vector<cell_family>& f, engine& g) const;
  std::size_t atoms() const { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
  std::vector<tower_cell> atom_;
  std::vector<std::uint8_t> is_tail_;
};

// Tower over a Bernoulli (full-branch, affine) base. With tau_mode::one every
// step redraws the cell; with tau_mode::geometric a cell owns a column of
// height tau ~ Geometric(rho), R0 = 1 on levels >= 1 and J constant along it.
struct tower_model {
  std::vector<cell_family> families;
  tau_mode tau = tau_mode::one;
  double rho = 0.0;
  double tau_bar = 1.0;
  std::int64_t head = 4096;
  cell_sampler sampler;
  // target constants of the construction
  std::vector<double> alphas, sigmas2;
  double sigma_J2 = 0.0;

  // exact means under mu_Delta, filled by prepare()
  double mean_r0 = 0.0, mean_jr0 = 0.0, mean_r = 0.0;

  // builds the sampler and the exact means after the families are set
  void prepare();
  tower_cell draw(engine& g) const { return sampler.draw(families, g); }
  // mu_Delta(R0 = n, J = j), including tower levels
  double joint_pmf(std::int64_t n, double j) const;
  // mu_Delta(R0 = n)
  double pmf_r0(std::int64_t n) const;
  // mu_Delta(R0 > n)
  double tail_r0(std::int64_t n) const;
  double total_mass() const;  // base mass, 1 up to rounding
  // renewal sequence of the column heights: P(level 0 at step n | level 0 at 0)
  std::vector<double> base_return_probabilities(std::int64_t n_max) const;
};

struct tower_spec {
  std::vector<double> alphas{1.0};
  std::vector<double> sigmas2{0.5};
  tau_mode tau = tau_mode::one;
  double rho = 0.5;
  std::int64_t head = 4096;
};

// Synthetic tower with mu_Delta(R0 = n, J = alpha_i) = 2 sigma_i^2 n^-3 for
// n >= 2 and the residual mass at n = 1. Throws infeasible_error when the
// law does not fit in probability one.
tower_model build_tower(const tower_spec& s);
// Largest total sigma^2 the construction accepts for the given mean height.
double feasibility_bound(double tau_bar = 1.0);

// sum_{m <= p} sum_i alpha_i^2 m^2 mu(R0 = m, J = alpha_i), by direct summation.
double exact_second_moment(const tower_model& m, std::int64_t p);

enum class observable { jr0, r0, r, indicator_base };
const char* to_string(observable o);

// Centered per-step value of the observable at (cell, level).
double observable_value(const tower_model& m, observable o, const tower_cell& c, std::int64_t level);
double observable_mean(const tower_model& m, observable o);

// Birkhoff sums S_n of the centered observable for each sample at each of
// the increasing checkpoints; values[sample * checkpoints.size() + k].
struct birkhoff_sums {
  std::vector<std::int64_t> checkpoints;
  std::size_t samples = 0;
  std::vector<double> values;
  double at(std::size_t sample, std::size_t k) const { return values[sample * checkpoints.size() + k]; }
};
birkhoff_sums simulate(const tower_model& m, observable o, const std::vector<std::int64_t>& checkpoints,
                       std::size_t samples, std::uint64_t seed, exec e = exec::parallel);

// Stationary tower orbit: cells and levels of one sequential stream.
class tower_orbit {
 public:
  tower_orbit(const tower_model& m, std::uint64_t seed, std::uint64_t stream);
  void step();
  const tower_cell& current() const { return cell_; }
  std::int64_t level() const { return level_; }
  std::int64_t height() const { return height_; }

 private:
  void new_column(bool stationary);
  const tower_model* m_;
  engine g_;
  tower_cell cell_{};
  std::int64_t level_ = 0, height_ = 1;
};

struct clt_options {
  std::vector<std::int64_t> n_grid{1 << 12, 1 << 16, 1 << 20};
  std::size_t samples = 5000;        // at the largest n
  std::size_t max_sample_boost = 16;  // smaller n get samples * min(boost, n_max / n)
};
// Scale of S_n / sqrt(n log n) per n: robust (IQR) variance ratio, raw
// sample variance ratio and KS distance to N(0, sigma_hat^2).
stat_report nonstandard_clt_test(const tower_model& m, observable o, double target_variance, const clt_options& c,
                                 std::uint64_t seed, exec e = exec::parallel);

// Empirical mu(R0 = k, R0 o f^n = l) on a stationary orbit against
// C k^-beta l^-beta; C is the smallest constant covering every populated cell.
struct pair_options {
  std::int64_t k_max = 16;
  std::vector<std::int64_t> n_set{1, 2, 8, 32};
  std::uint64_t orbit_len = 20'000'000;
  double beta = 3.0;
  std::uint64_t min_count = 20;
};
stat_report pair_condition_check(const tower_model& m, const pair_options& o, std::uint64_t seed);

// int A_{d,e} (A_{d',e'} o f^n) dmu for n <= n_max with
// A_{d,e} = (J R0 - E[J R0 | d <= R0 < e]) 1{d <= R0 < e}.
struct adde_options {
  std::int64_t d = 1, e = 2, d_p = 1, e_p = 2;
  std::int64_t n_max = 16;
  std::uint64_t orbit_len = 20'000'000;
  std::size_t batches = 16;
};
stat_report adde_correlation(const tower_model& m, const adde_options& o, std::uint64_t seed);

}  // namespace flatcyl
