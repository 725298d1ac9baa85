#pragma once

#include <string>
#include <vector>

namespace cscore {

// Exit codes: 0 success (alerts are findings, not failures), 2 invalid input
// or usage, 1 internal error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInvalid = 2;

/// Entry point for the `cscore` command line: subcommands cam, score,
/// trajectory and fixtures. argv[0] is the program name.
int cli_main(int argc, const char* const* argv);
int cli_main(const std::vector<std::string>& args);

}  // namespace cscore
