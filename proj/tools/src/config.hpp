#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "twosphere/geometry.hpp"
#include "twosphere/spectra.hpp"

namespace twosphere::cli {

enum class Format { csv, json };

struct Regime {
  double delta = 0.0;
  double beta = 0.5;
  double c0 = 1.0;
};

/// Everything a run needs after the config file and the flags are merged.
/// Optional fields distinguish "not given" from a default, so that
/// conflicting inputs can be rejected instead of silently resolved.
struct RunConfig {
  std::string command;

  double r1 = 1.0;
  double r2 = 1.0;
  std::optional<long double> epsilon;
  std::optional<double> delta;
  double beta = 0.5;
  double c0 = 1.0;

  double rho = 1.0;
  std::optional<double> rho_b;
  double kappa = 1.0;
  std::optional<double> kappa_b;

  double tol = 1e-12;
  std::int64_t max_terms = 100'000'000;

  std::vector<double> eps_grid;
  std::vector<double> delta_grid;

  std::vector<std::array<double, 3>> points;
  int gap_samples = 0;
  int samples = 200;

  std::optional<double> omega;
  std::optional<double> omega_min;
  std::optional<double> omega_max;
  int omega_points = 2001;
  std::array<double, 3> direction{0.0, 0.0, 1.0};
  double pole_guard = 1e-10;

  std::string out = "-";
  Format format = Format::csv;
  int jobs = 1;
  bool error_json = false;
};

/// The separation for single-geometry commands: epsilon, or the regime value.
long double resolved_epsilon(const RunConfig& c);

/// Material for a given contrast. Under a regime the density contrast is
/// delta and the resonator wave speed is kept at its configured value.
Material resolved_material(const RunConfig& c, std::optional<double> regime_delta);

/// Shortest decimal text that reads back to the same long double.
std::string format_length(long double x);

/// Checks cross-field constraints for the command; throws InvalidArgument.
void validate(const RunConfig& c);

/// Applies keys of a JSON object onto c (unknown keys are rejected).
void apply_json(RunConfig& c, const nlohmann::json& j);

/// Canonical JSON of the fields that determine the numerical output.
nlohmann::json canonical_json(const RunConfig& c);

/// 64-bit FNV-1a of the canonical JSON text, as 16 hex digits.
std::string config_hash(const RunConfig& c);

}  // namespace twosphere::cli
