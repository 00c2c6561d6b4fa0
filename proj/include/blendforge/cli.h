#pragma once

#include <ostream>

namespace blendforge {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kInfeasible = 1;
inline constexpr int kValidation = 2;
inline constexpr int kIo = 3;
}  // namespace exit_code

// Subcommands: count, optimize, compare, analyze. Tables go to `out`,
// diagnostics to `err`; machine documents only to --out/--report files.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace blendforge
