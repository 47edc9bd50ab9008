#pragma once

#include <iosfwd>

namespace kta::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

inline constexpr const char* kVersion = "0.1.0";

// Entry point of the `kta` tool. Errors are reported on `err` as one line,
//   error kind=<config|usage|data|runtime> message="..."
// and mapped to kExitConfig (config, usage) or kExitRuntime.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kta::cli
