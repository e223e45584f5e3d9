#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tpdo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;

/// Runs one command line (without the program name). Without --out the report envelope
/// goes to `out` and the summary to `err`; with --out files are written and the summary
/// goes to `out`. Failures print a JSON error object to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tpdo::cli
