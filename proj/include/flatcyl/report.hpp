#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace flatcyl {

using cell = std::variant<double, std::int64_t, std::string>;

struct table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<cell>> rows;

  void add(std::vector<cell> row) { rows.push_back(std::move(row)); }
  double number(std::size_t row, const std::string& column) const;
};

// Result of one experiment: named scalars, flags, and plot-ready tables.
struct stat_report {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> values;
  std::vector<std::string> flags;
  std::vector<table> tables;

  void set(const std::string& key, double v);
  double get(const std::string& key) const;
  bool has(const std::string& key) const;
  table& add_table(std::string name, std::vector<std::string> columns);
  const table& tab(const std::string& name) const;
};

std::string format_double(double v);  // %.17g
void write_csv(const table& t, const std::filesystem::path& path);
std::string to_csv(const table& t);
nlohmann::json to_json(const stat_report& r);

}  // namespace flatcyl
