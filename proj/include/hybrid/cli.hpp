#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hybrid::cli {

inline constexpr const char* kToolName = "hybridsp";
inline constexpr const char* kVersion = "0.3.0";

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitAudit = 2;

// Runs one subcommand; args excludes the program name. Reports go to `out`
// (and to <--out>/report.json, <--out>/sweep.csv), diagnostics to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hybrid::cli
