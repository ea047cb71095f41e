#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace obsdet::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

/// Parses and runs one subcommand (index, detect, eval, synth, sweep).
/// Results go to `out`; timings, warnings and errors go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace obsdet::cli
