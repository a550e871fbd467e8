#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "flatcyl/coupled.hpp"
#include "flatcyl/surface.hpp"
#include "flatcyl/tower.hpp"

namespace flatcyl {

struct tolerances {
  double tol_c = 1e-12;          // kind classification margin on |c| - 1
  double quad_tol = 1e-10;       // relative, neck quadratures
  double ode_tol = 1e-13;        // Riccati local error control
  double riccati_tol = 1e-8;     // horizon-doubling convergence of k+
  double integrate_tol = 1e-10;  // global Clairaut drift bound of the geodesic integrator
  double oracle_ode_tol = 1e-11; // ODE oracle of the transition map
};

struct run_sizes {
  // transition
  std::size_t clairaut_samples = 10000;
  double clairaut_T = 1000.0;
  std::size_t oracle_samples = 1000;
  int oracle_n_hi = 50;
  // bands
  int band_n_lo = 10, band_n_hi = 1000, band_count = 9, band_samples = 5;
  // riccati
  std::size_t riccati_samples = 10000;
  int lemma_n_s = 9, lemma_n_psi = 9;
  std::vector<double> kappas{0.25, 1.0, 4.0};
  // tails
  int tail_n_lo = 100, tail_n_hi = 1000;
  std::uint64_t tail_mc_samples = 10'000'000;
  int tail_mc_n_max = 200;
  std::size_t neck_samples = 100000;
  std::vector<double> neck_r_values{5.0, 6.0};
  // tower-clt
  std::vector<std::int64_t> clt_n_grid{1 << 12, 1 << 16, 1 << 20};
  std::size_t clt_samples = 5000;
  std::size_t clt_boost = 16;
  std::vector<std::int64_t> second_moment_p{100, 1000, 10000, 100000, 1000000};
  std::uint64_t pair_orbit_len = 20'000'000;
  std::int64_t pair_k_max = 16;
  std::vector<std::int64_t> pair_n_set{1, 2, 8, 32};
  std::uint64_t adde_orbit_len = 20'000'000;
  std::int64_t adde_n_max = 16;
  // wip
  std::int64_t wip_n = 1 << 20;
  std::size_t wip_samples = 5000;
  std::vector<double> wip_t_grid{0.25, 0.5, 1.0};
  std::vector<std::int64_t> r_clt_n_grid{1 << 12, 1 << 16};
  std::size_t r_clt_samples = 2000;
  // decay
  std::uint64_t decay_orbit_len = 100'000'000;
  std::int64_t decay_lag_lo = 8, decay_lag_hi = 128;
  std::size_t decay_batches = 16;
  std::vector<std::int64_t> decay_tail_n{10, 100, 1000, 10000};
};

struct experiment_config {
  profile_params profile;
  tolerances tol;
  tower_spec tower;
  coupled_spec coupled;
  run_sizes run;
  std::uint64_t seed = 1;
};

// Keys absent from the document keep their defaults; unknown keys, wrong
// types and violated invariants throw config_error.
experiment_config parse_config(const nlohmann::json& j);
experiment_config load_config(const std::filesystem::path& path);
// Fully resolved configuration; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const experiment_config& c);

}  // namespace flatcyl
