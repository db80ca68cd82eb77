#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wma::cli {

/// Exit codes of every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitTaskFailed = 1;
inline constexpr int kExitUsage = 2;

/// Runs one `wma` invocation. `args` excludes the program name. Reports go
/// to `out`, diagnostics to `err`; artifacts are written atomically.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wma::cli
