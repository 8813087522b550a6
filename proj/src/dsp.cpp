// SPDX-License-Identifier: Apache-2.0
#include "myo/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

namespace myo::dsp {

namespace {

constexpr auto kPairTable = [] {
  std::array<std::pair<std::size_t, std::size_t>, kPairs> table{};
  std::size_t p = 0;
  for (std::size_t i = 0; i < kElectrodes; ++i) {
    for (std::size_t j = i + 1; j < kElectrodes; ++j) {
      table[p++] = {i, j};
    }
  }
  return table;
}();

std::vector<Biquad> design_sections(FilterVariant variant) {
  const double fs = kSampleRateHz;
  const double butter_q = butterworth_section_qs(2).front();
  std::vector<Biquad> sections;
  switch (variant) {
  case FilterVariant::LowCost:
    sections.push_back(design_highpass(kLowCostHighpassHz, fs, butter_q));
    break;
  case FilterVariant::ResearchGrade:
    sections.push_back(design_highpass(kResearchLowHz, fs, butter_q));
    sections.push_back(design_lowpass(kResearchHighHz, fs, butter_q));
    for (double f : kNotchHz) {
      sections.push_back(design_notch(f, fs, kNotchQ));
    }
    break;
  }
  return sections;
}

} // namespace

std::pair<std::size_t, std::size_t> pair_electrodes(std::size_t p) {
  if (p >= kPairs) {
    throw std::out_of_range("pair index out of range");
  }
  return kPairTable[p];
}

ChannelFrame expand_channels(const ElectrodeFrame &frame) {
  ChannelFrame out;
  out.t_ms = frame.t_ms;
  const auto &s = frame.samples;
  std::copy(s.begin(), s.end(), out.channels.begin());
  for (std::size_t p = 0; p < kPairs; ++p) {
    const auto [i, j] = kPairTable[p];
    out.channels[kElectrodes + p] = s[i] - s[j];
  }
  return out;
}

ChannelFrame expand_channels(std::int64_t t_ms, std::span<const double> samples) {
  if (samples.size() != kElectrodes) {
    throw std::invalid_argument("expected " + std::to_string(kElectrodes) +
                                " electrode samples, got " + std::to_string(samples.size()));
  }
  ElectrodeFrame frame;
  frame.t_ms = t_ms;
  std::copy(samples.begin(), samples.end(), frame.samples.begin());
  return expand_channels(frame);
}

std::string_view to_string(FilterVariant v) {
  return v == FilterVariant::LowCost ? "lowcost" : "research";
}

FilterVariant parse_filter_variant(std::string_view s) {
  if (s == "lowcost" || s == "low-cost") {
    return FilterVariant::LowCost;
  }
  if (s == "research" || s == "research-grade") {
    return FilterVariant::ResearchGrade;
  }
  throw std::invalid_argument("unknown filter variant '" + std::string(s) + "'");
}

FilterModel::FilterModel(FilterVariant variant)
    : variant_(variant), cascade_(design_sections(variant), kChannels) {}

bool FilterModel::stable() const {
  return std::all_of(sections().begin(), sections().end(),
                     [](const Biquad &b) { return b.stable(); });
}

ChannelFrame FilterModel::filter_frame(const ChannelFrame &frame) {
  ChannelFrame out = frame;
  filter_channels(out.channels);
  return out;
}

void FilterModel::filter_channels(std::span<double> channels) {
  if (channels.size() != cascade_.lanes()) {
    throw std::invalid_argument("filter holds state for " + std::to_string(cascade_.lanes()) +
                                " channels, got " + std::to_string(channels.size()));
  }
  for (std::size_t c = 0; c < channels.size(); ++c) {
    channels[c] = cascade_.process(c, channels[c]);
  }
}

void FilterModel::write_coefficients(std::ostream &os) const {
  os << "# filter " << to_string(variant_) << " fs " << kSampleRateHz << " sections "
     << sections().size() << '\n';
  char buf[256];
  for (std::size_t i = 0; i < sections().size(); ++i) {
    const Biquad &q = sections()[i];
    std::snprintf(buf, sizeof buf, "section %zu b %.17g %.17g %.17g a 1 %.17g %.17g\n", i, q.b0,
                  q.b1, q.b2, q.a1, q.a2);
    os << buf;
  }
}

FilterModel make_filter(FilterVariant variant) { return FilterModel(variant); }

MavWindow::MavWindow() : ring_(kWindowSamples) { reset(); }

void MavWindow::reset() {
  for (auto &row : ring_) {
    row.fill(0.0);
  }
  head_ = 0;
  seen_ = 0;
  latest_ = FeatureFrame{};
}

bool MavWindow::push(const ChannelFrame &frame) {
  auto &slot = ring_[head_];
  for (std::size_t c = 0; c < kChannels; ++c) {
    slot[c] = std::abs(frame.channels[c]);
  }
  head_ = (head_ + 1) % ring_.size();
  ++seen_;
  if (seen_ % kHopSamples != 0) {
    return false;
  }
  // Oldest to newest, so the sum order matches a plain scan of the recording.
  std::array<double, kChannels> sum{};
  for (std::size_t k = 0; k < ring_.size(); ++k) {
    const auto &row = ring_[(head_ + k) % ring_.size()];
    for (std::size_t c = 0; c < kChannels; ++c) {
      sum[c] += row[c];
    }
  }
  latest_.t_ms = frame.t_ms + 1;
  for (std::size_t c = 0; c < kChannels; ++c) {
    latest_.mav[c] = sum[c] / kWindowSamples;
  }
  return true;
}

std::vector<FeatureFrame> mav_stream(std::span<const ChannelFrame> frames) {
  MavWindow window;
  std::vector<FeatureFrame> out;
  out.reserve(frames.size() / kHopSamples);
  for (const auto &f : frames) {
    if (window.push(f)) {
      out.push_back(window.latest());
    }
  }
  return out;
}

BaselineVector estimate_baseline(std::span<const FeatureFrame> features,
                                 const std::vector<bool> &rest_mask) {
  if (rest_mask.size() != features.size()) {
    throw std::invalid_argument("rest mask length does not match feature count");
  }
  BaselineVector sum{};
  std::size_t n = 0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (!rest_mask[i]) {
      continue;
    }
    for (std::size_t c = 0; c < kChannels; ++c) {
      sum[c] += features[i].mav[c];
    }
    ++n;
  }
  if (n == 0) {
    throw std::invalid_argument("baseline needs at least one rest frame");
  }
  for (double &v : sum) {
    v /= static_cast<double>(n);
  }
  return sum;
}

FeatureFrame subtract_baseline(const FeatureFrame &frame, const BaselineVector &baseline) {
  FeatureFrame out = frame;
  for (std::size_t c = 0; c < kChannels; ++c) {
    out.mav[c] -= baseline[c];
  }
  return out;
}

std::vector<double> subtract_baseline(std::span<const double> mav,
                                      std::span<const double> baseline) {
  if (mav.size() != baseline.size()) {
    throw std::invalid_argument("feature/baseline dimension mismatch");
  }
  std::vector<double> out(mav.size());
  for (std::size_t c = 0; c < mav.size(); ++c) {
    out[c] = mav[c] - baseline[c];
  }
  return out;
}

} // namespace myo::dsp
