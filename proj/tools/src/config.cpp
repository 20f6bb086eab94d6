#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>

#include "twosphere/errors.hpp"

namespace twosphere::cli {

namespace {

using detail::require;

const std::set<std::string> kCommands = {"capacitance", "resonances", "field",
                                         "blowup",      "scattering", "sweep"};

bool single_geometry(const std::string& cmd) {
  return cmd == "capacitance" || cmd == "resonances" || cmd == "field" || cmd == "scattering";
}

template <typename T>
T get_as(const nlohmann::json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidArgument("config key '" + key + "' has the wrong type");
  }
}

std::array<double, 3> triple(const nlohmann::json& j, const std::string& key) {
  const auto v = get_as<std::vector<double>>(j, key);
  require(v.size() == 3, "config key '" + key + "' needs three components");
  return {v[0], v[1], v[2]};
}

// Separations below the double range can be written as strings, e.g. "1e-500".
long double parse_length(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) {
    const std::string text = v.get<std::string>();
    char* end = nullptr;
    const long double x = std::strtold(text.c_str(), &end);
    require(end != text.c_str() && *end == '\0', "config key '" + key + "' is not a number");
    return x;
  }
  return get_as<double>(v, key);
}

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

std::string format_length(long double x) {
  char buf[64];
  for (int precision = 15; precision <= 21; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*Lg", precision, x);
    if (std::strtold(buf, nullptr) == x) break;
  }
  return buf;
}

long double resolved_epsilon(const RunConfig& c) {
  if (c.epsilon) return *c.epsilon;
  require(c.delta.has_value(), "no separation given: pass --eps or --delta");
  return epsilon_from_regime(*c.delta, c.beta, c.c0);
}

Material resolved_material(const RunConfig& c, std::optional<double> regime_delta) {
  Material m{c.rho, c.rho_b.value_or(1e-3), c.kappa, c.kappa_b.value_or(1e-3)};
  if (regime_delta) {
    const double vb = m.v_b();
    m.rho_b = *regime_delta * m.rho;
    m.kappa_b = vb * vb * m.rho_b;
  }
  return m;
}

void validate(const RunConfig& c) {
  require(kCommands.count(c.command) == 1, "unknown command '" + c.command + "'");
  require(positive_finite(c.r1) && positive_finite(c.r2), "radii must be positive");
  require(positive_finite(c.rho) && positive_finite(c.kappa),
          "background density and bulk modulus must be positive");
  require(!c.rho_b || positive_finite(*c.rho_b), "rho_b must be positive");
  require(!c.kappa_b || positive_finite(*c.kappa_b), "kappa_b must be positive");
  require(positive_finite(c.tol), "tolerance must be positive");
  require(c.max_terms >= 1, "max_terms must be positive");
  require(c.jobs >= 1, "jobs must be at least 1");
  require(c.beta > 0.0 && c.beta < 1.0, "regime exponent beta must lie in (0, 1)");
  require(positive_finite(c.c0), "regime scale c0 must be positive");

  const bool regime = c.delta.has_value() || !c.delta_grid.empty();
  if (regime && c.rho_b) {
    throw InvalidArgument("rho_b conflicts with a regime: the contrast is set by delta");
  }
  if (single_geometry(c.command)) {
    require(c.epsilon.has_value() != c.delta.has_value(),
            "give exactly one of --eps or --delta (with --beta and --c0)");
    if (c.epsilon) {
      require(std::isfinite(*c.epsilon) && *c.epsilon > 0.0L,
              "separation epsilon must be positive");
    }
    if (c.delta) {
      require(*c.delta > 0.0 && *c.delta < 1.0, "contrast delta must lie in (0, 1)");
    }
    require(c.eps_grid.empty() && c.delta_grid.empty(),
            "grids are only used by the blowup and sweep commands");
  } else {
    require(!c.epsilon && !c.delta, "the " + c.command + " command takes a grid, not --eps/--delta");
    if (c.command == "blowup") {
      require(c.delta_grid.empty(), "blowup sweeps the separation; use --eps-grid");
      require(c.eps_grid.size() >= 2, "blowup needs at least two separations in --eps-grid");
      require(c.samples >= 100, "blowup needs at least 100 samples");
    } else {
      require(c.eps_grid.empty() != c.delta_grid.empty(),
              "sweep needs exactly one of --eps-grid or --delta-grid");
    }
    for (double e : c.eps_grid) require(positive_finite(e), "eps-grid entries must be positive");
    for (double d : c.delta_grid) {
      require(d > 0.0 && d < 1.0, "delta-grid entries must lie in (0, 1)");
    }
  }
  if (c.command == "field") {
    require(!c.points.empty() || c.gap_samples > 0,
            "field needs --point or --gap-samples");
    require(c.gap_samples >= 0, "gap-samples must be non-negative");
  }
  if (c.command == "scattering") {
    const double len = std::sqrt(c.direction[0] * c.direction[0] +
                                 c.direction[1] * c.direction[1] +
                                 c.direction[2] * c.direction[2]);
    require(std::abs(len - 1.0) < 1e-12, "incident direction must be a unit vector");
    require(!c.omega || positive_finite(*c.omega), "omega must be positive");
    require(!c.omega_min || positive_finite(*c.omega_min), "omega-min must be positive");
    require(!c.omega_max || positive_finite(*c.omega_max), "omega-max must be positive");
    if (c.omega_min && c.omega_max) require(*c.omega_min < *c.omega_max, "omega-min must be below omega-max");
    require(c.omega_points >= 2, "omega-points must be at least 2");
    require(positive_finite(c.pole_guard), "pole guard must be positive");
    require(c.points.empty() || c.omega, "field points in scattering need a single --omega");
  }
}

void apply_json(RunConfig& c, const nlohmann::json& j) {
  require(j.is_object(), "config file must hold a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "command") c.command = get_as<std::string>(v, key);
    else if (key == "r1") c.r1 = get_as<double>(v, key);
    else if (key == "r2") c.r2 = get_as<double>(v, key);
    else if (key == "epsilon") c.epsilon = parse_length(v, key);
    else if (key == "delta") c.delta = get_as<double>(v, key);
    else if (key == "beta") c.beta = get_as<double>(v, key);
    else if (key == "c0") c.c0 = get_as<double>(v, key);
    else if (key == "rho") c.rho = get_as<double>(v, key);
    else if (key == "rho_b") c.rho_b = get_as<double>(v, key);
    else if (key == "kappa") c.kappa = get_as<double>(v, key);
    else if (key == "kappa_b") c.kappa_b = get_as<double>(v, key);
    else if (key == "tol") c.tol = get_as<double>(v, key);
    else if (key == "max_terms") c.max_terms = get_as<std::int64_t>(v, key);
    else if (key == "eps_grid") c.eps_grid = get_as<std::vector<double>>(v, key);
    else if (key == "delta_grid") c.delta_grid = get_as<std::vector<double>>(v, key);
    else if (key == "points") {
      require(v.is_array(), "config key 'points' must be an array");
      c.points.clear();
      for (const auto& p : v) c.points.push_back(triple(p, key));
    } else if (key == "gap_samples") c.gap_samples = get_as<int>(v, key);
    else if (key == "samples") c.samples = get_as<int>(v, key);
    else if (key == "omega") c.omega = get_as<double>(v, key);
    else if (key == "omega_min") c.omega_min = get_as<double>(v, key);
    else if (key == "omega_max") c.omega_max = get_as<double>(v, key);
    else if (key == "omega_points") c.omega_points = get_as<int>(v, key);
    else if (key == "direction") c.direction = triple(v, key);
    else if (key == "pole_guard") c.pole_guard = get_as<double>(v, key);
    else if (key == "out") c.out = get_as<std::string>(v, key);
    else if (key == "format") {
      const auto f = get_as<std::string>(v, key);
      require(f == "csv" || f == "json", "format must be csv or json");
      c.format = f == "csv" ? Format::csv : Format::json;
    } else if (key == "jobs") c.jobs = get_as<int>(v, key);
    else if (key == "error_json") c.error_json = get_as<bool>(v, key);
    else throw InvalidArgument("unknown config key '" + key + "'");
  }
}

nlohmann::json canonical_json(const RunConfig& c) {
  nlohmann::json j;
  j["command"] = c.command;
  j["r1"] = c.r1;
  j["r2"] = c.r2;
  if (c.epsilon) {
    j["epsilon"] = format_length(*c.epsilon);
  }
  if (c.delta) j["delta"] = *c.delta;
  j["beta"] = c.beta;
  j["c0"] = c.c0;
  j["rho"] = c.rho;
  if (c.rho_b) j["rho_b"] = *c.rho_b;
  j["kappa"] = c.kappa;
  if (c.kappa_b) j["kappa_b"] = *c.kappa_b;
  j["tol"] = c.tol;
  j["max_terms"] = c.max_terms;
  if (!c.eps_grid.empty()) j["eps_grid"] = c.eps_grid;
  if (!c.delta_grid.empty()) j["delta_grid"] = c.delta_grid;
  if (!c.points.empty()) j["points"] = c.points;
  if (c.gap_samples) j["gap_samples"] = c.gap_samples;
  j["samples"] = c.samples;
  if (c.omega) j["omega"] = *c.omega;
  if (c.omega_min) j["omega_min"] = *c.omega_min;
  if (c.omega_max) j["omega_max"] = *c.omega_max;
  j["omega_points"] = c.omega_points;
  j["direction"] = c.direction;
  j["pole_guard"] = c.pole_guard;
  return j;
}

std::string config_hash(const RunConfig& c) {
  const std::string text = canonical_json(c).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace twosphere::cli
