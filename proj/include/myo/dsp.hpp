// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "myo/biquad.hpp"
#include "myo/types.hpp"

namespace myo::dsp {

/// Electrode indices (i, j), i < j, of differential channel kElectrodes + p.
std::pair<std::size_t, std::size_t> pair_electrodes(std::size_t p);

ChannelFrame expand_channels(const ElectrodeFrame &frame);
/// Throws std::invalid_argument unless exactly six samples are given.
ChannelFrame expand_channels(std::int64_t t_ms, std::span<const double> samples);

enum class FilterVariant { LowCost, ResearchGrade };

std::string_view to_string(FilterVariant v);
/// Accepts "lowcost"/"low-cost" and "research"/"research-grade".
FilterVariant parse_filter_variant(std::string_view s);

// Digital realization of the two acquisition chains at fs = 1 kHz:
//   low-cost:       2nd-order Butterworth high-pass at 55 Hz. The analog
//                   2500/3000 Hz edges lie above Nyquist and are pass-through.
//   research-grade: 2nd-order Butterworth high-pass at 15 Hz and low-pass at
//                   375 Hz (4th-order band-pass), then Q=30 notches at 60, 120
//                   and 180 Hz.
inline constexpr double kLowCostHighpassHz = 55.0;
inline constexpr double kResearchLowHz = 15.0;
inline constexpr double kResearchHighHz = 375.0;
inline constexpr std::array<double, 3> kNotchHz{60.0, 120.0, 180.0};
inline constexpr double kNotchQ = 30.0;

/// Per-channel IIR filter for the 21-channel stream.
class FilterModel {
public:
  explicit FilterModel(FilterVariant variant);

  FilterVariant variant() const { return variant_; }
  const std::vector<Biquad> &sections() const { return cascade_.sections(); }
  std::size_t channel_count() const { return cascade_.lanes(); }
  bool stable() const;

  /// Advances every channel by one sample.
  ChannelFrame filter_frame(const ChannelFrame &frame);
  /// Span form; throws std::invalid_argument on a channel-count mismatch.
  void filter_channels(std::span<double> channels);
  void reset() { cascade_.reset(); }

  /// Plain-text coefficient dump, one line per section:
  ///   section <i> b <b0> <b1> <b2> a 1 <a1> <a2>
  void write_coefficients(std::ostream &os) const;

private:
  FilterVariant variant_;
  SosCascade cascade_;
};

FilterModel make_filter(FilterVariant variant);

/// Streaming 300-sample rectangular MAV with a 40-sample hop. History before
/// the first sample counts as zeros, so the first frame (t = 40 ms) already
/// averages over a full 300-sample window.
class MavWindow {
public:
  MavWindow();

  /// Returns true when a new feature frame was completed.
  bool push(const ChannelFrame &frame);
  const FeatureFrame &latest() const { return latest_; }
  std::size_t samples_seen() const { return seen_; }
  void reset();

private:
  std::vector<std::array<double, kChannels>> ring_;
  std::size_t head_ = 0;
  std::size_t seen_ = 0;
  FeatureFrame latest_;
};

std::vector<FeatureFrame> mav_stream(std::span<const ChannelFrame> frames);

using BaselineVector = std::array<double, kChannels>;

/// Per-channel mean MAV over frames flagged as rest.
BaselineVector estimate_baseline(std::span<const FeatureFrame> features,
                                 const std::vector<bool> &rest_mask);

FeatureFrame subtract_baseline(const FeatureFrame &frame, const BaselineVector &baseline);
/// Span form; throws std::invalid_argument on dimension mismatch.
std::vector<double> subtract_baseline(std::span<const double> mav,
                                      std::span<const double> baseline);

} // namespace myo::dsp
