#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gausscol::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumeric = 1;
inline constexpr int kExitUsage = 2;

/// Expands "5:25:2" (inclusive range), "25,50,75" and mixtures such as
/// "5:9:2,20".  Throws std::invalid_argument on malformed input or any
/// value below 1.
std::vector<int> parse_n_list(const std::string& text);

/// Runs the command line (args excludes the program name).  Data goes to
/// --output (default "-", standard output); summary lines go to out and
/// diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gausscol::cli
