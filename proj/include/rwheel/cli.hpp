#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rwheel {

/// Exit statuses shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitDomain = 3 };

/// Entry point of the `rwheel` command line tool (train, evaluate, recommend,
/// factors). Writes results to `out` and diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rwheel
