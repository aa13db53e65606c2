#pragma once

#include <string>
#include <vector>

namespace hduva::cli {

// Exit codes: 0 ok, 2 argument errors, 3 I/O errors, 4 training divergence,
// 5 missing artifact (checkpoint/manifest).
inline constexpr int kExitOk = 0;
inline constexpr int kExitArgs = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitDiverged = 4;
inline constexpr int kExitMissing = 5;

int run_cli(const std::vector<std::string>& args);

}  // namespace hduva::cli
