#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"
#include "output.hpp"

namespace twosphere::cli {

Table cmd_capacitance(const RunConfig& c);
Table cmd_resonances(const RunConfig& c);
Table cmd_field(const RunConfig& c);
Table cmd_blowup(const RunConfig& c);
Table cmd_scattering(const RunConfig& c);
Table cmd_sweep(const RunConfig& c);

Table run_command(const RunConfig& c);

enum ExitCode : int { kSuccess = 0, kInternalError = 1, kInvalidConfig = 2, kNumericalFailure = 3 };

/// Full driver: parses argv, runs, writes output. Returns the exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace twosphere::cli
