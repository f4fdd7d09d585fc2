#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dtrimer::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // solver failure, failed verification, too many failed cells
inline constexpr int kExitInvalid = 2;  // bad flags, config or parameters

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dtrimer::cli
