#pragma once

#include <iosfwd>

namespace pdwsim::cli {

/// Exit codes of the pdwsim tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pdwsim::cli
