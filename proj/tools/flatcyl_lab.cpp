// flatcyl-lab <subcommand> --config <path> [--seed N] [--out DIR]
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <boost/version.hpp>
#include <json.hpp>

#include "flatcyl/config.hpp"
#include "flatcyl/errors.hpp"
#include "flatcyl/experiments.hpp"
#include "flatcyl/parallel.hpp"
#include "flatcyl/report.hpp"
#include "flatcyl/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace flatcyl;

namespace {

json versions() {
  return {{"flatcyl", version},
          {"compiler", __VERSION__},
          {"cplusplus", __cplusplus},
          {"boost", BOOST_LIB_VERSION},
          {"openmp", _OPENMP},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"cli11", CLI11_VERSION}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open " + path.string());
  f << text;
  if (!f) throw io_error("write failed: " + path.string());
}

// every table plus one key/value table per report
json write_outputs(const std::vector<stat_report>& reports, const fs::path& out) {
  json listing = json::array();
  for (const auto& r : reports) {
    json files = json::array();
    table values{"values", {"key", "value"}, {}};
    for (const auto& [k, v] : r.values) values.add({k, v});
    std::vector<const table*> all{&values};
    for (const auto& t : r.tables) all.push_back(&t);
    for (const auto* t : all) {
      const std::string file = r.name + "_" + t->name + ".csv";
      write_csv(*t, out / file);
      files.push_back(file);
    }
    json j = to_json(r);
    j["files"] = files;
    listing.push_back(j);
  }
  return listing;
}

int fail(const error& e, const fs::path& out, bool out_ready) {
  const json rec{{"error", e.kind()}, {"message", e.what()}, {"exit_code", static_cast<int>(e.code())}};
  std::cerr << rec.dump() << "\n";
  if (out_ready) {
    try {
      write_text(out / "error.json", rec.dump(2) + "\n");
    } catch (...) {
    }
  }
  return static_cast<int>(e.code());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flatcyl-lab: geodesic flow on a surface with a flat cylinder, batch experiments"};
  std::string sub, config_path, out_dir = "out";
  std::uint64_t seed = 0;
  std::string names;
  for (const auto& s : subcommands()) names += s + ", ";
  app.add_option("subcommand", sub, "one of: " + names + "all")->required();
  app.add_option("--config", config_path, "JSON experiment configuration")->required();
  auto* seed_opt = app.add_option("--seed", seed, "override the configuration seed");
  app.add_option("--out", out_dir, "output directory (created if missing)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(exit_code::usage);
  }
  if (!is_subcommand(sub)) {
    std::cerr << json{{"error", "usage"}, {"message", "unknown subcommand '" + sub + "'"},
                      {"exit_code", static_cast<int>(exit_code::usage)}}
                     .dump()
              << "\n";
    return static_cast<int>(exit_code::usage);
  }

  const fs::path out(out_dir);
  bool out_ready = false;
  try {
    auto cfg = load_config(config_path);
    if (*seed_opt) cfg.seed = seed;
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) throw io_error("cannot create output directory " + out.string());
    out_ready = true;

    const auto t0 = std::chrono::steady_clock::now();
    const auto reports = run_subcommand(sub, cfg);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json manifest;
    manifest["tool"] = "flatcyl-lab";
    manifest["subcommand"] = sub;
    manifest["seed"] = cfg.seed;
    manifest["config_path"] = config_path;
    manifest["config"] = to_json(cfg);
    manifest["versions"] = versions();
    manifest["threads"] = worker_count();
    manifest["wall_time_seconds"] = wall;
    manifest["reports"] = write_outputs(reports, out);
    write_text(out / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "wrote " << reports.size() << " reports to " << out.string() << " in " << wall << " s\n";
    return 0;
  } catch (const error& e) {
    return fail(e, out, out_ready);
  } catch (const std::exception& e) {
    return fail(error(std::string("unexpected: ") + e.what()), out, out_ready);
  }
}
