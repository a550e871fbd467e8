#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flatcyl/config.hpp"
#include "flatcyl/parallel.hpp"
#include "flatcyl/report.hpp"
#include "flatcyl/riccati.hpp"

namespace flatcyl {

// Subcommands in the order `all` runs them.
const std::vector<std::string>& subcommands();
bool is_subcommand(const std::string& name);

// Reports of one subcommand; `all` concatenates every subcommand.
std::vector<stat_report> run_subcommand(const std::string& name, const experiment_config& c, exec e = exec::parallel);

// sup |c(t) - c(0)| over random initial vectors integrated to T or exit.
stat_report clairaut_conservation(const profile_params& p, std::size_t samples, double T, double tol,
                                  std::uint64_t seed, exec e = exec::parallel);

// Closed-form transition map against the ODE oracle on entry vectors drawn
// from bands n in [n0, n_hi], alternating kinds.
stat_report transition_oracle(const profile_params& p, std::size_t samples, int n_hi, double quad_tol,
                              double ode_tol, double tol_c, std::uint64_t seed, exec e = exec::parallel);

// k+ in the constant-curvature mode against sqrt(kappa) over a direction grid.
stat_report constant_curvature_check(const profile_params& p, const std::vector<double>& kappas,
                                     const riccati_options& o, exec e = exec::parallel);

// exact_second_moment(p) - 2 sigma_J^2 ln p per p, with its oscillation over p >= 10^4.
stat_report second_moment_report(const tower_model& m, const std::vector<std::int64_t>& ps);

}  // namespace flatcyl
