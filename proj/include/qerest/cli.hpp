#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qerest {

/// Exit codes of the command-line tool.
enum ExitCode : int { exit_ok = 0, exit_validation = 1, exit_runtime = 2 };

/// Entry point behind the `qerest` binary. args[0] is the program name.
/// Subcommands: spectrum, flow-check, qe-run, report.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace qerest
