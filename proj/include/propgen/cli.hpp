#pragma once

#include <string>
#include <vector>

namespace propgen {

// Exit codes: 0 success, 2 configuration error (bad flags, bad config file),
// 3 data validation error (unreadable or invariant-breaking inputs),
// 4 internal error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitInternal = 4;

int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace propgen
