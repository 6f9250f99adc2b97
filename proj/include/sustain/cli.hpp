#pragma once

#include <iosfwd>

namespace sustain::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;    // bad arguments or invalid scenario
inline constexpr int kExitRuntime = 2;  // model failure, infeasibility, I/O trouble

// Entry point behind the `sustain` executable; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace sustain::cli
