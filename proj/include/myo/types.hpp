// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace myo {

inline constexpr std::size_t kElectrodes = 6;
inline constexpr std::size_t kPairs = kElectrodes * (kElectrodes - 1) / 2;
inline constexpr std::size_t kChannels = kElectrodes + kPairs;
inline constexpr std::size_t kDofs = 6;

inline constexpr int kSampleRateHz = 1000;
inline constexpr int kHopSamples = 40;     // 25 Hz control cadence
inline constexpr int kWindowSamples = 300; // MAV smoothing window

using Kinematics = std::array<double, kDofs>;

/// One 1-kHz acquisition sample across the six single-ended electrodes.
struct ElectrodeFrame {
  std::int64_t t_ms = 0;
  std::array<double, kElectrodes> samples{};
};

/// Single-ended electrodes followed by the 15 differential pairs.
struct ChannelFrame {
  std::int64_t t_ms = 0;
  std::array<double, kChannels> channels{};
};

struct FeatureFrame {
  std::int64_t t_ms = 0;
  std::array<double, kChannels> mav{};
};

} // namespace myo
