#include "flatcyl/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "flatcyl/errors.hpp"

namespace flatcyl {

double table::number(std::size_t row, const std::string& column) const {
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] != column) continue;
    const cell& c = rows.at(row).at(j);
    if (auto d = std::get_if<double>(&c)) return *d;
    if (auto i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
    throw error("table " + name + ": column " + column + " is not numeric");
  }
  throw error("table " + name + ": no column " + column);
}

void stat_report::set(const std::string& key, double v) {
  for (auto& [k, x] : values)
    if (k == key) {
      x = v;
      return;
    }
  values.emplace_back(key, v);
}

double stat_report::get(const std::string& key) const {
  for (const auto& [k, x] : values)
    if (k == key) return x;
  throw error("report " + name + ": no value " + key);
}

bool stat_report::has(const std::string& key) const {
  for (const auto& kv : values)
    if (kv.first == key) return true;
  return false;
}

table& stat_report::add_table(std::string tname, std::vector<std::string> columns) {
  tables.push_back({std::move(tname), std::move(columns), {}});
  return tables.back();
}

const table& stat_report::tab(const std::string& tname) const {
  for (const auto& t : tables)
    if (t.name == tname) return t;
  throw error("report " + name + ": no table " + tname);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string render(const cell& c) {
  if (auto d = std::get_if<double>(&c)) return format_double(*d);
  if (auto i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return quote(std::get<std::string>(c));
}

}  // namespace

std::string to_csv(const table& t) {
  std::string out;
  for (std::size_t j = 0; j < t.columns.size(); ++j) out += (j ? "," : "") + quote(t.columns[j]);
  out += "\r\n";
  for (const auto& row : t.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out += (j ? "," : "") + render(row[j]);
    out += "\r\n";
  }
  return out;
}

void write_csv(const table& t, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open " + path.string());
  f << to_csv(t);
  if (!f) throw io_error("write failed: " + path.string());
}

nlohmann::json to_json(const stat_report& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["seed"] = r.seed;
  nlohmann::json vals = nlohmann::json::object();
  for (const auto& [k, v] : r.values) vals[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(format_double(v));
  j["values"] = vals;
  j["flags"] = r.flags;
  nlohmann::json tabs = nlohmann::json::array();
  for (const auto& t : r.tables) tabs.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", t.rows.size()}});
  j["tables"] = tabs;
  return j;
}

}  // namespace flatcyl
