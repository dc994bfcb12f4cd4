#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bnlab {

/// Exit codes of the command line tool.
enum ExitCode : int { kExitOk = 0, kExitNumerical = 1, kExitUsage = 2 };

/// Entry point of the `bnlab` tool. Subcommands: simulate, reform-check,
/// energy-monitor, rate-study, lp-analyze. Failures print an error JSON to
/// `err` (and to <output_dir>/error.json when possible).
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace bnlab
