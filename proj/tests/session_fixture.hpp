// SPDX-License-Identifier: Apache-2.0
// Synthetic six-DOF calibration sessions for evaluation tests.
#pragma once

#include "myo/decoder.hpp"
#include "myo/dsp.hpp"
#include "myo/evalkit.hpp"
#include "myo/synthemg.hpp"

namespace fixture {

inline myo::evalkit::DecodingSession synthetic_session(int repetitions, std::uint64_t seed,
                                                       myo::dsp::FilterVariant variant =
                                                           myo::dsp::FilterVariant::LowCost) {
  using namespace myo;
  const auto profile = synth::make_profile(synth::six_movement_schedule(repetitions));
  const auto emg = synth::synthesize_emg(profile, synth::SynergyModel::flexor_extensor(), seed);
  auto filter = dsp::make_filter(variant);
  std::vector<ChannelFrame> channels;
  channels.reserve(emg.size());
  for (const auto &e : emg) channels.push_back(filter.filter_frame(dsp::expand_channels(e)));
  evalkit::DecodingSession s;
  s.features = dsp::mav_stream(channels);
  for (std::size_t j = 0; j < s.features.size(); ++j) {
    s.kinematics.push_back(profile.trajectory[j]);
    s.labels.push_back(profile.segment_labels[j]);
  }
  return s;
}

/// Six-DOF model trained on every frame, baseline from the rest frames.
inline myo::decoder::KalmanModel trained_model(const myo::evalkit::DecodingSession &s) {
  using namespace myo;
  std::vector<bool> rest(s.frames());
  for (std::size_t i = 0; i < rest.size(); ++i) rest[i] = s.labels[i] == 0;
  const auto baseline = dsp::estimate_baseline(s.features, rest);
  decoder::Matrix Z(static_cast<Eigen::Index>(s.frames()), kChannels);
  decoder::Matrix X(static_cast<Eigen::Index>(s.frames()), kDofs);
  for (std::size_t i = 0; i < s.frames(); ++i) {
    const auto z = dsp::subtract_baseline(s.features[i], baseline);
    for (std::size_t c = 0; c < kChannels; ++c) Z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = z.mav[c];
    for (std::size_t d = 0; d < kDofs; ++d) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = s.kinematics[i][d];
  }
  auto model = decoder::train(Z, X);
  model.set_baseline(baseline);
  return model;
}

} // namespace fixture
