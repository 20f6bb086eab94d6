#include "output.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <sstream>

#include <unistd.h>

namespace twosphere::cli {

const std::vector<std::pair<std::string, std::string>>& unit_legend() {
  static const std::vector<std::pair<std::string, std::string>> legend = {
      {"L", "length, in the units of the radii"},
      {"L^-1", "inverse length"},
      {"L^-2", "inverse area (rescaled capacitance, eigenvalues)"},
      {"T^-1", "angular frequency, in units of the wave speeds over L"},
      {"1", "dimensionless"},
      {"rad", "angle"},
      {"P", "pressure, in units of the incident amplitude"},
  };
  return legend;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

namespace {

std::string cell_text(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return format_number(*d);
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  return std::get<std::string>(cell);
}

nlohmann::json cell_json(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) {
    if (!std::isfinite(*d)) return nullptr;
    return *d;
  }
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return *i;
  return std::get<std::string>(cell);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

void write_csv(std::ostream& os, const Table& t, const RunConfig& c) {
  os << "# tool: " << kToolName << ' ' << kToolVersion << '\n';
  os << "# command: " << t.command << '\n';
  os << "# config_hash: " << config_hash(c) << '\n';
  os << "# config: " << canonical_json(c).dump() << '\n';
  os << "# columns:";
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    os << (i ? ", " : " ") << t.columns[i].name << " [" << t.columns[i].unit << ']';
  }
  os << '\n';
  for (const auto& [unit, meaning] : unit_legend()) os << "# unit " << unit << ": " << meaning << '\n';
  for (const auto& [key, value] : t.summary) os << "# summary " << key << ": " << cell_text(value) << '\n';
  for (const auto& w : t.warnings) os << "# warning: " << w << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i].name;
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_escape(cell_text(row[i]));
    os << '\n';
  }
}

nlohmann::json to_json(const Table& t, const RunConfig& c) {
  nlohmann::json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["command"] = t.command;
  j["config_hash"] = config_hash(c);
  j["config"] = canonical_json(c);
  j["columns"] = nlohmann::json::array();
  for (const auto& col : t.columns) j["columns"].push_back({{"name", col.name}, {"unit", col.unit}});
  j["units"] = nlohmann::json::object();
  for (const auto& [unit, meaning] : unit_legend()) j["units"][unit] = meaning;
  j["summary"] = nlohmann::json::object();
  for (const auto& [key, value] : t.summary) j["summary"][key] = cell_json(value);
  j["warnings"] = t.warnings;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& cell : row) r.push_back(cell_json(cell));
    j["rows"].push_back(std::move(r));
  }
  return j;
}

void write_json(std::ostream& os, const Table& t, const RunConfig& c) {
  os << to_json(t, c).dump(2) << '\n';
}

nlohmann::json metadata(const Table& t, const RunConfig& c, const std::vector<std::string>& argv,
                        double elapsed_seconds) {
  nlohmann::json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["command"] = t.command;
  j["config_hash"] = config_hash(c);
  j["argv"] = argv;
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  j["created_utc"] = stamp;
  char host[256] = {0};
  if (gethostname(host, sizeof host - 1) == 0) j["host"] = host;
  j["elapsed_seconds"] = elapsed_seconds;
  j["jobs"] = c.jobs;
  j["format"] = c.format == Format::csv ? "csv" : "json";
#if defined(__clang__)
  j["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  j["compiler"] = std::string("gcc ") + __VERSION__;
#endif
  j["rows"] = t.rows.size();
  j["warnings"] = t.warnings;
  return j;
}

}  // namespace twosphere::cli
