#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace geofuse {

/// Exit codes of run_command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Runs one `geofuse` subcommand. Data goes to the declared output paths,
/// human-readable summaries to `out`, diagnostics to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err);
int run_command(int argc, const char* const* argv);

}  // namespace geofuse
