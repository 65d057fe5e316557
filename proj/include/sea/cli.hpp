#pragma once

#include <iosfwd>

namespace sea::cli {

// Exit codes: 0 success, 1 runtime error or bound violation, 2 usage or config error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the sea-alloc tool. Output goes to `out`, errors to `err`.
int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sea::cli
