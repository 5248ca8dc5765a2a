#pragma once

#include <iosfwd>

namespace csent::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

/// Parses argv, runs one subcommand and maps failures to exit codes.
/// Data goes to `out` (or files); diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace csent::cli
