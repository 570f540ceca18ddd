#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pesp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitBudgetLimited = 2;

/// Runs one CLI invocation; `args` excludes the program name. The JSON
/// summary goes to `out` (and to <out-dir>/summary.json), diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pesp
