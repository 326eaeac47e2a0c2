#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rklda::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericalError = 3 };

/// Runs one subcommand. `args` excludes the program name. Reports and usage
/// text go to `out`, diagnostics to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Sidecar path for the run manifest written next to `output`.
std::string manifest_path(const std::string& output);

}  // namespace rklda::cli
