#pragma once

#include <iosfwd>

namespace fractrace::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kIoError = 1;
inline constexpr int kCheckFailed = 2;
inline constexpr int kResourceCap = 3;

// Entry point shared by the binary and the tests.
int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fractrace::cli
