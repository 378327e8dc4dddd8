#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace hfcov::cli {

/// Exit-code contract of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitBand = 4;

/// Flat `key = value` file; `#` starts a comment, blank lines are skipped.
/// Throws ArgumentError on a line without `=` or an empty key.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// "1,1.2,2" or "lo:step:hi" (inclusive, endpoints rounded to 1e-12).
std::vector<double> parse_number_list(const std::string& text);

/// Runs one subcommand (simulate, estimate, allocate, backtest, verify-rate)
/// and returns its exit code. Normal output goes to `out`, diagnostics to
/// `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hfcov::cli
