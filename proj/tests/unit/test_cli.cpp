#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "commands.hpp"
#include "config.hpp"

namespace cli = twosphere::cli;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code = -1;
  std::string out;
  std::string err;
};

Invocation run(std::vector<std::string> args) {
  args.insert(args.begin(), "twosphere");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Invocation r;
  r.code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> lines;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

// Column name -> value for the first data row.
std::map<std::string, std::string> first_row(const std::string& csv) {
  const auto lines = data_lines(csv);
  EXPECT_GE(lines.size(), 2u);
  const auto head = split(lines.at(0));
  const auto row = split(lines.at(1));
  std::map<std::string, std::string> m;
  for (std::size_t i = 0; i < head.size(); ++i) m[head[i]] = row.at(i);
  return m;
}

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "twosphere_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(Cli, SymmetricCapacitanceRow) {
  const Invocation r = run({"capacitance", "--r1", "1", "--r2", "1", "--eps", "0.01"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto row = first_row(r.out);
  EXPECT_EQ(row.at("c11"), row.at("c22"));
  EXPECT_EQ(row.at("c12"), row.at("c21"));
  EXPECT_LT(std::stod(row.at("c12")), 0.0);
}

TEST(Cli, HeaderBlock) {
  const Invocation r = run({"resonances", "--eps", "1e-3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("# tool: twosphere 1.0.0\n", 0), 0u);
  EXPECT_NE(r.out.find("# config_hash: "), std::string::npos);
  EXPECT_NE(r.out.find("# columns: epsilon [L]"), std::string::npos);
  EXPECT_NE(r.out.find("# unit T^-1:"), std::string::npos);
}

TEST(Cli, TinySeparationCompletes) {
  const Invocation r = run({"resonances", "--eps", "1e-8"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto row = first_row(r.out);
  EXPECT_NEAR(std::stod(row.at("lambda1")), 3.0 * std::log(2.0), 1e-4);
}

TEST(Cli, CsvNumbersRoundTripExactly) {
  const Invocation r = run({"capacitance", "--r1", "0.5", "--r2", "2", "--eps", "0.03"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto& [name, text] : first_row(r.out)) {
    const double x = std::strtod(text.c_str(), nullptr);
    EXPECT_EQ(cli::format_number(x), text) << name;
  }
}

TEST(Cli, JsonMirrorsCsv) {
  const Invocation csv = run({"capacitance", "--r2", "2", "--eps", "0.05"});
  const Invocation js = run({"capacitance", "--r2", "2", "--eps", "0.05", "--format", "json"});
  ASSERT_EQ(csv.code, 0);
  ASSERT_EQ(js.code, 0);
  const auto doc = nlohmann::json::parse(js.out);
  EXPECT_EQ(doc["tool"], "twosphere");
  EXPECT_EQ(doc["command"], "capacitance");
  const auto row = first_row(csv.out);
  ASSERT_EQ(doc["rows"].size(), 1u);
  for (std::size_t i = 0; i < doc["columns"].size(); ++i) {
    const std::string name = doc["columns"][i]["name"];
    const auto& v = doc["rows"][0][i];
    const double x = v.is_number() ? v.get<double>() : std::nan("");
    EXPECT_EQ(x, std::strtod(row.at(name).c_str(), nullptr)) << name;
  }
  EXPECT_NE(csv.out.find("# config_hash: " + doc["config_hash"].get<std::string>()), std::string::npos);
}

TEST(Cli, DeterministicAcrossRunsAndJobs) {
  const Invocation a = run({"sweep", "--eps-grid", "1e-1,1e-2,1e-3,1e-4", "--jobs", "1"});
  const Invocation b = run({"sweep", "--eps-grid", "1e-1,1e-2,1e-3,1e-4", "--jobs", "1"});
  const Invocation c = run({"sweep", "--eps-grid", "1e-1,1e-2,1e-3,1e-4", "--jobs", "3"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
}

TEST(Cli, OutputFileGetsMetadataSidecar) {
  const fs::path out = temp_dir() / "cap.csv";
  fs::remove(out);
  const Invocation r = run({"capacitance", "--eps", "0.1", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string body = slurp(out);
  EXPECT_EQ(body, run({"capacitance", "--eps", "0.1"}).out);
  const auto meta = nlohmann::json::parse(slurp(out.string() + ".meta.json"));
  EXPECT_TRUE(meta.contains("created_utc"));
  EXPECT_TRUE(meta.contains("config_hash"));
}

TEST(Cli, InteriorPointRefused) {
  const Invocation r = run({"field", "--eps", "0.1", "--point", "0,0,0.5"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("inside"), std::string::npos);
}

TEST(Cli, FieldAlongGap) {
  const Invocation r = run({"field", "--eps", "0.01", "--gap-samples", "5", "--point", "3,0,0"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(data_lines(r.out).size(), 7u);
}

TEST(Cli, InvalidConfigurations) {
  EXPECT_EQ(run({"resonances", "--delta", "0.01", "--beta", "1.5"}).code, 2);
  EXPECT_EQ(run({"resonances", "--eps", "0.1", "--delta", "0.01"}).code, 2);
  EXPECT_EQ(run({"resonances"}).code, 2);
  EXPECT_EQ(run({"resonances", "--eps", "-1"}).code, 2);
  EXPECT_EQ(run({"resonances", "--eps", "abc"}).code, 2);
  EXPECT_EQ(run({"resonances", "--eps", "0.1", "--format", "xml"}).code, 2);
  EXPECT_EQ(run({"resonances", "--eps", "0.1", "--bogus", "1"}).code, 2);
  EXPECT_EQ(run({"resonances", "--delta", "0.01", "--rho-b", "0.1"}).code, 2);
  EXPECT_EQ(run({"blowup", "--eps-grid", "1e-2"}).code, 2);
  EXPECT_EQ(run({"nonsense"}).code, 2);
}

TEST(Cli, NumericalFailureExitCode) {
  const Invocation r = run({"capacitance", "--eps", "1e-30"});
  EXPECT_EQ(r.code, 3);
}

TEST(Cli, ErrorJson) {
  const Invocation r = run({"resonances", "--delta", "0.1", "--beta", "1.5", "--error-json"});
  EXPECT_EQ(r.code, 2);
  const auto doc = nlohmann::json::parse(r.err);
  EXPECT_EQ(doc["error"]["code"], 2);
  EXPECT_EQ(doc["error"]["kind"], "invalid_config");
  EXPECT_FALSE(doc["error"]["message"].get<std::string>().empty());
}

TEST(Cli, FlagsOverrideConfigFile) {
  const fs::path cfg = temp_dir() / "cfg.json";
  std::ofstream(cfg) << R"({"r1": 1, "r2": 2, "epsilon": "0.01", "tol": 1e-11})";
  const Invocation from_file = run({"capacitance", "--config", cfg.string()});
  const Invocation overridden = run({"capacitance", "--config", cfg.string(), "--r2", "1"});
  const Invocation direct = run({"capacitance", "--eps", "0.01", "--tol", "1e-11"});
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  EXPECT_EQ(first_row(from_file.out).at("r2"), "2");
  EXPECT_EQ(first_row(overridden.out).at("r2"), "1");
  EXPECT_EQ(overridden.out, direct.out);
}

TEST(Cli, ConfigFileErrors) {
  const fs::path bad = temp_dir() / "bad.json";
  std::ofstream(bad) << R"({"r1": 1, "radius": 2})";
  EXPECT_EQ(run({"capacitance", "--config", bad.string(), "--eps", "0.1"}).code, 2);
  std::ofstream(bad) << "{not json";
  EXPECT_EQ(run({"capacitance", "--config", bad.string(), "--eps", "0.1"}).code, 2);
  EXPECT_EQ(run({"capacitance", "--config", "/nonexistent/cfg.json", "--eps", "0.1"}).code, 2);
}

TEST(Cli, BlowupSlope) {
  const Invocation r = run({"blowup", "--eps-grid", "1e-2,1e-3,1e-4", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_NEAR(doc["summary"]["slope_u2"].get<double>(), -1.0, 0.1);
}

TEST(Cli, ScatteringPeakNearFirstResonance) {
  const Invocation r = run({"scattering", "--r2", "2", "--eps", "0.01", "--omega-points", "501",
                     "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  const double w1 = doc["summary"]["omega1"];
  const double w2 = doc["summary"]["omega2"];
  EXPECT_NEAR(doc["summary"]["peak_abs_a_omega"].get<double>(), w1, 0.01 * w1);
  EXPECT_NEAR(doc["summary"]["peak_abs_b_omega"].get<double>(), w2, 0.01 * w2);
}

TEST(Cli, ScatteringAtPoints) {
  const Invocation r = run({"scattering", "--eps", "0.01", "--omega", "0.01", "--point", "0,0,5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(data_lines(r.out).size(), 2u);
}

TEST(Cli, RegimeSweepExponents) {
  const Invocation r = run({"sweep", "--delta-grid", "1e-2,1e-3,1e-4", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_NEAR(doc["summary"]["slope_omega1_asym_vs_delta"].get<double>(), 0.5, 0.05);
}

TEST(Cli, ExecutableExitCodes) {
  const std::string exe = TWOSPHERE_CLI_PATH;
  const auto status = [&](const std::string& args) {
    const int s = std::system((exe + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status("capacitance --eps 0.1"), 0);
  EXPECT_EQ(status("capacitance --eps 0.1 --beta 2"), 2);
  EXPECT_EQ(status("capacitance --eps 1e-30"), 3);
  EXPECT_EQ(status("--version"), 0);
}

TEST(Cli, SymmetricFirstResonanceMatchesClosedForm) {
  const Invocation r = run({"resonances", "--eps", "1e-6", "--rho-b", "1e-3", "--kappa-b", "1e-3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const double expected = std::sqrt(1e-3 * 3.0 * std::log(2.0));
  EXPECT_NEAR(std::stod(first_row(r.out).at("omega1")), expected, 1e-3 * expected);
}

TEST(Cli, PoleGuardIsNumericalFailure) {
  const Invocation probe = run({"resonances", "--eps", "0.01", "--format", "json"});
  ASSERT_EQ(probe.code, 0);
  const auto doc = nlohmann::json::parse(probe.out);
  const double w1 = doc["rows"][0][7];
  const Invocation r = run({"scattering", "--eps", "0.01", "--omega", cli::format_number(w1)});
  EXPECT_EQ(r.code, 3) << r.err;
}
