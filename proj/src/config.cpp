#include "flatcyl/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <string>

#include "flatcyl/errors.hpp"

namespace flatcyl {

namespace {

using nlohmann::json;

// One section of the document: named fields bound to config members, used
// both to read and to write so the two never drift apart.
class section {
 public:
  template <class T>
  void field(const std::string& key, T& ref) {
    read_[key] = [&ref, key](const json& v) {
      try {
        ref = v.get<T>();
      } catch (const json::exception& e) {
        throw config_error("config key '" + key + "': " + e.what());
      }
    };
    write_.emplace_back(key, [&ref]() { return json(ref); });
  }
  void read(const json& j, const std::string& where) const {
    if (!j.is_object()) throw config_error("config section '" + where + "' must be an object");
    for (const auto& [k, v] : j.items()) {
      const auto it = read_.find(k);
      if (it == read_.end()) throw config_error("unknown config key '" + where + "." + k + "'");
      it->second(v);
    }
  }
  json write() const {
    json j = json::object();
    for (const auto& [k, f] : write_) j[k] = f();
    return j;
  }

 private:
  std::map<std::string, std::function<void(const json&)>> read_;
  std::vector<std::pair<std::string, std::function<json()>>> write_;
};

struct bound_config {
  section profile, tol, tower, coupled, run;
  std::string tau_mode_name;

  explicit bound_config(experiment_config& c) {
    profile.field("r", c.profile.r);
    profile.field("L", c.profile.L);
    profile.field("eps0", c.profile.eps0);
    profile.field("kappa_cap", c.profile.kappa_cap);
    profile.field("n0", c.profile.n0);

    tol.field("tol_c", c.tol.tol_c);
    tol.field("quad_tol", c.tol.quad_tol);
    tol.field("ode_tol", c.tol.ode_tol);
    tol.field("riccati_tol", c.tol.riccati_tol);
    tol.field("integrate_tol", c.tol.integrate_tol);
    tol.field("oracle_ode_tol", c.tol.oracle_ode_tol);

    tau_mode_name = c.tower.tau == tau_mode::geometric ? "geometric" : "one";
    tower.field("alphas", c.tower.alphas);
    tower.field("sigmas2", c.tower.sigmas2);
    tower.field("tau_mode", tau_mode_name);
    tower.field("rho", c.tower.rho);
    tower.field("head", c.tower.head);

    coupled.field("A_total", c.coupled.A_total);
    coupled.field("alpha0", c.coupled.alpha0);
    coupled.field("alpha_pi", c.coupled.alpha_pi);
    coupled.field("h_bar", c.coupled.h_bar);
    coupled.field("head", c.coupled.head);

    auto& r = c.run;
    run.field("clairaut_samples", r.clairaut_samples);
    run.field("clairaut_T", r.clairaut_T);
    run.field("oracle_samples", r.oracle_samples);
    run.field("oracle_n_hi", r.oracle_n_hi);
    run.field("band_n_lo", r.band_n_lo);
    run.field("band_n_hi", r.band_n_hi);
    run.field("band_count", r.band_count);
    run.field("band_samples", r.band_samples);
    run.field("riccati_samples", r.riccati_samples);
    run.field("lemma_n_s", r.lemma_n_s);
    run.field("lemma_n_psi", r.lemma_n_psi);
    run.field("kappas", r.kappas);
    run.field("tail_n_lo", r.tail_n_lo);
    run.field("tail_n_hi", r.tail_n_hi);
    run.field("tail_mc_samples", r.tail_mc_samples);
    run.field("tail_mc_n_max", r.tail_mc_n_max);
    run.field("neck_samples", r.neck_samples);
    run.field("neck_r_values", r.neck_r_values);
    run.field("clt_n_grid", r.clt_n_grid);
    run.field("clt_samples", r.clt_samples);
    run.field("clt_boost", r.clt_boost);
    run.field("second_moment_p", r.second_moment_p);
    run.field("pair_orbit_len", r.pair_orbit_len);
    run.field("pair_k_max", r.pair_k_max);
    run.field("pair_n_set", r.pair_n_set);
    run.field("adde_orbit_len", r.adde_orbit_len);
    run.field("adde_n_max", r.adde_n_max);
    run.field("wip_n", r.wip_n);
    run.field("wip_samples", r.wip_samples);
    run.field("wip_t_grid", r.wip_t_grid);
    run.field("r_clt_n_grid", r.r_clt_n_grid);
    run.field("r_clt_samples", r.r_clt_samples);
    run.field("decay_orbit_len", r.decay_orbit_len);
    run.field("decay_lag_lo", r.decay_lag_lo);
    run.field("decay_lag_hi", r.decay_lag_hi);
    run.field("decay_batches", r.decay_batches);
    run.field("decay_tail_n", r.decay_tail_n);
  }
};

void check(const experiment_config& c) {
  validate(c.profile);
  for (double t : {c.tol.tol_c, c.tol.quad_tol, c.tol.ode_tol, c.tol.riccati_tol, c.tol.integrate_tol,
                   c.tol.oracle_ode_tol})
    if (!(t > 0.0)) throw config_error("tolerances must be positive");
  const auto& r = c.run;
  if (r.clairaut_samples == 0 || !(r.clairaut_T > 0.0) || r.oracle_samples == 0 || r.oracle_n_hi < c.profile.n0)
    throw config_error("run: transition sizes must be positive and oracle_n_hi >= n0");
  if (r.kappas.empty() || r.neck_r_values.empty() || r.clt_n_grid.empty() || r.second_moment_p.empty() ||
      r.wip_t_grid.empty() || r.pair_n_set.empty())
    throw config_error("run: list-valued sizes must be nonempty");
  for (double k : r.kappas)
    if (!(k > 0.0)) throw config_error("run: kappas must be positive");
}

}  // namespace

experiment_config parse_config(const json& j) {
  if (!j.is_object()) throw config_error("config must be a JSON object");
  experiment_config c;
  bound_config b(c);
  for (const auto& [k, v] : j.items()) {
    if (k == "seed") {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        throw config_error("config key 'seed' must be a nonnegative integer");
      c.seed = v.get<std::uint64_t>();
    } else if (k == "profile") {
      b.profile.read(v, k);
    } else if (k == "tolerances") {
      b.tol.read(v, k);
    } else if (k == "tower") {
      b.tower.read(v, k);
    } else if (k == "coupled") {
      b.coupled.read(v, k);
    } else if (k == "run") {
      b.run.read(v, k);
    } else {
      throw config_error("unknown config key '" + k + "'");
    }
  }
  if (b.tau_mode_name == "one")
    c.tower.tau = tau_mode::one;
  else if (b.tau_mode_name == "geometric")
    c.tower.tau = tau_mode::geometric;
  else
    throw config_error("tower.tau_mode must be \"one\" or \"geometric\"");
  c.coupled.quad_tol = c.tol.quad_tol;
  check(c);
  return c;
}

experiment_config load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw config_error("malformed config " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const experiment_config& c) {
  experiment_config copy = c;
  bound_config b(copy);
  return {{"seed", c.seed},
          {"profile", b.profile.write()},
          {"tolerances", b.tol.write()},
          {"tower", b.tower.write()},
          {"coupled", b.coupled.write()},
          {"run", b.run.write()}};
}

}  // namespace flatcyl
