// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace myo::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kIo = 3, kNumeric = 4 };

inline constexpr std::uint64_t kDefaultSeed = 1;
inline constexpr const char *kOutDirEnv = "MYOCTL_OUT_DIR";

/// Runs one `myoctl` invocation. args excludes the program name.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace myo::cli
