#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "twosphere/errors.hpp"

namespace twosphere::cli {

namespace {

enum class Kind { number, integer, text, length, list, triple, points };

struct FlagSpec {
  const char* flag;
  const char* key;
  Kind kind;
  const char* help;
};

// Every flag maps onto a config-file key, so flags and files share one parser.
const FlagSpec kFlags[] = {
    {"--r1", "r1", Kind::number, "radius of D1"},
    {"--r2", "r2", Kind::number, "radius of D2"},
    {"--eps", "epsilon", Kind::length, "separation (long double; strings such as 1e-500 accepted)"},
    {"--delta", "delta", Kind::number, "contrast; sets eps = c0 exp(-1/delta^(1-beta))"},
    {"--beta", "beta", Kind::number, "regime exponent in (0, 1)"},
    {"--c0", "c0", Kind::number, "regime prefactor"},
    {"--rho", "rho", Kind::number, "background density"},
    {"--rho-b", "rho_b", Kind::number, "resonator density"},
    {"--kappa", "kappa", Kind::number, "background bulk modulus"},
    {"--kappa-b", "kappa_b", Kind::number, "resonator bulk modulus"},
    {"--tol", "tol", Kind::number, "series truncation tolerance"},
    {"--max-terms", "max_terms", Kind::integer, "series term cap"},
    {"--eps-grid", "eps_grid", Kind::list, "comma-separated separations"},
    {"--delta-grid", "delta_grid", Kind::list, "comma-separated contrasts (regime sweep)"},
    {"--point", "points", Kind::points, "evaluation point x,y,z (repeatable)"},
    {"--gap-samples", "gap_samples", Kind::integer, "points on the gap segment"},
    {"--samples", "samples", Kind::integer, "angular samples per surface in the blow-up search"},
    {"--omega", "omega", Kind::number, "incident frequency"},
    {"--omega-min", "omega_min", Kind::number, "response curve lower frequency"},
    {"--omega-max", "omega_max", Kind::number, "response curve upper frequency"},
    {"--omega-points", "omega_points", Kind::integer, "response curve grid size"},
    {"--direction", "direction", Kind::triple, "incident unit direction x,y,z"},
    {"--pole-guard", "pole_guard", Kind::number, "relative exclusion band around resonances"},
    {"--out", "out", Kind::text, "output path or - for stdout"},
    {"--format", "format", Kind::text, "csv or json"},
    {"--jobs", "jobs", Kind::integer, "worker threads"},
};

const char* type_name(Kind k) {
  switch (k) {
    case Kind::number:
    case Kind::length: return "NUM";
    case Kind::integer: return "INT";
    case Kind::text: return "TEXT";
    case Kind::list: return "NUM,NUM,...";
    case Kind::triple:
    case Kind::points: return "X,Y,Z";
  }
  return "";
}

double to_number(const std::string& s, const std::string& flag) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw InvalidArgument(flag + ": '" + s + "' is not a number");
  return x;
}

std::vector<double> to_list(const std::string& s, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_number(item, flag));
  return out;
}

nlohmann::json flag_json(const FlagSpec& f, const std::vector<std::string>& values) {
  const std::string& last = values.back();
  switch (f.kind) {
    case Kind::number: return to_number(last, f.flag);
    case Kind::integer: {
      const double x = to_number(last, f.flag);
      if (x != static_cast<double>(static_cast<std::int64_t>(x))) {
        throw InvalidArgument(std::string(f.flag) + " needs an integer");
      }
      return static_cast<std::int64_t>(x);
    }
    case Kind::text: return last;
    case Kind::length: to_number(last, f.flag); return last;  // kept as text for long double
    case Kind::list: return to_list(last, f.flag);
    case Kind::triple: return to_list(last, f.flag);
    case Kind::points: {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& v : values) arr.push_back(to_list(v, f.flag));
      return arr;
    }
  }
  return nullptr;
}

// Rejects --eps 1e-500 style values that stod cannot hold but strtold can.
void check_length(const std::string& s) {
  char* end = nullptr;
  std::strtold(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw InvalidArgument("--eps: '" + s + "' is not a number");
}

nlohmann::json error_document(int code, const std::string& kind, const std::string& message) {
  return {{"error", {{"code", code}, {"kind", kind}, {"message", message}}}};
}

void emit(const Table& t, const RunConfig& c, std::ostream& os) {
  if (c.format == Format::json) {
    write_json(os, t, c);
  } else {
    write_csv(os, t, c);
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv, argv + argc);
  bool error_json = false;
  for (const auto& a : args) error_json = error_json || a == "--error-json";

  const auto fail = [&](int code, const std::string& kind, const std::string& message) {
    if (error_json) {
      err << error_document(code, kind, message).dump() << '\n';
    } else {
      err << kToolName << ": error: " << message << '\n';
    }
    return code;
  };

  CLI::App app{"Two-sphere subwavelength resonator toolkit", kToolName};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);
  std::string config_path;
  bool error_json_flag = false;
  std::map<std::string, std::vector<std::string>> raw;

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"capacitance", "capacitance matrix, exact and asymptotic"},
      {"resonances", "resonant frequencies and eigen data"},
      {"field", "potentials, modes and gradients at exterior points"},
      {"blowup", "gradient blow-up over a separation grid"},
      {"scattering", "modal response to a plane wave"},
      {"sweep", "resonances over a separation or contrast grid"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON config file; flags override its values");
    sub->add_flag("--error-json", error_json_flag, "write errors as JSON on stderr");
    for (const auto& f : kFlags) {
      auto* opt = sub->add_option(f.flag, raw[f.key], f.help)
                      ->allow_extra_args(false)
                      ->expected(1)
                      ->type_name(type_name(f.kind));
      if (f.kind == Kind::points) opt->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
      else opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << kToolName << ' ' << kToolVersion << '\n';
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    return fail(kInvalidConfig, "usage", e.what());
  }

  RunConfig cfg;
  const auto started = std::chrono::steady_clock::now();
  Table table;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw InvalidArgument("cannot open config file '" + config_path + "'");
      nlohmann::json file;
      try {
        file = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument("config file '" + config_path + "' is not valid JSON: " + e.what());
      }
      if (file.is_object()) file.erase("command");
      apply_json(cfg, file);
    }
    nlohmann::json overrides = nlohmann::json::object();
    for (const auto& f : kFlags) {
      const auto& values = raw[f.key];
      if (values.empty()) continue;
      if (f.kind == Kind::length) check_length(values.back());
      overrides[f.key] = f.kind == Kind::length ? nlohmann::json(values.back()) : flag_json(f, values);
    }
    apply_json(cfg, overrides);
    cfg.command = app.get_subcommands().front()->get_name();
    cfg.error_json = error_json;
    table = run_command(cfg);
  } catch (const InvalidArgument& e) {
    return fail(kInvalidConfig, "invalid_config", e.what());
  } catch (const NumericalFailure& e) {
    return fail(kNumericalFailure, "numerical_failure", e.what());
  } catch (const std::exception& e) {
    return fail(kInternalError, "internal", e.what());
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  for (const auto& w : table.warnings) {
    if (!error_json) err << kToolName << ": warning: " << w << '\n';
  }
  if (cfg.out == "-") {
    emit(table, cfg, out);
    return kSuccess;
  }
  std::ofstream file(cfg.out, std::ios::binary);
  if (!file) return fail(kInvalidConfig, "invalid_config", "cannot write '" + cfg.out + "'");
  emit(table, cfg, file);
  std::ofstream meta(cfg.out + ".meta.json", std::ios::binary);
  meta << metadata(table, cfg, args, elapsed).dump(2) << '\n';
  if (!file || !meta) return fail(kInternalError, "io", "write to '" + cfg.out + "' failed");
  return kSuccess;
}

}  // namespace twosphere::cli
