#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace midctl::cli {

// Exit codes: 0 success, 1 runtime failure, 2 usage error. Failures print a
// single line "error: <code>: <message>" to `err`.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace midctl::cli
