#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace twosphere::cli {

inline constexpr const char* kToolName = "twosphere";
inline constexpr const char* kToolVersion = "1.0.0";

using Cell = std::variant<double, std::int64_t, std::string>;

struct Column {
  std::string name;
  std::string unit;
};

/// One command's result: a rectangular table plus scalar summary entries.
struct Table {
  std::string command;
  std::vector<Column> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, Cell>> summary;
  std::vector<std::string> warnings;
};

/// Unit legend shared by every command.
const std::vector<std::pair<std::string, std::string>>& unit_legend();

/// Shortest decimal text that reads back to the same double.
std::string format_number(double x);

void write_csv(std::ostream& os, const Table& t, const RunConfig& c);
nlohmann::json to_json(const Table& t, const RunConfig& c);
void write_json(std::ostream& os, const Table& t, const RunConfig& c);

/// Provenance for <out>.meta.json; the only place that records time and host.
nlohmann::json metadata(const Table& t, const RunConfig& c, const std::vector<std::string>& argv,
                        double elapsed_seconds);

}  // namespace twosphere::cli
