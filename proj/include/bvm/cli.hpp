#pragma once

// `bvm` command dispatcher. Results go to `out` as canonical JSON, diagnostics
// to `err`. Exit codes: 0 pass, 1 a check failed, 2 usage or format error,
// 3 unknown results present.

#include <ostream>
#include <string>
#include <vector>

namespace bvm::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitUnknown = 3;

/// args excludes the program name. Defaults for --seed, --atoms, --rank and
/// --budget come from BVM_SEED, BVM_ATOMS, BVM_RANK and BVM_BUDGET when set.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bvm::cli
