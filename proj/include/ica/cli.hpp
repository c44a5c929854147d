#pragma once

#include <iosfwd>

namespace ica {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitInvariant = 3;

/// Entry point of the command-line tool. Reports go to `out` unless --out is
/// given; diagnostics go to `err`. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ica
