// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "myo/datastore.hpp"
#include "myo/decoder.hpp"
#include "myo/dsp.hpp"
#include "myo/evalkit.hpp"
#include "myo/synthemg.hpp"

namespace myo::runtime {

/// 1-kHz electrode sample producer.
class SampleSource {
public:
  virtual ~SampleSource() = default;
  /// nullopt once exhausted.
  virtual std::optional<ElectrodeFrame> next() = 0;
};

class SynthSource final : public SampleSource {
public:
  SynthSource(synth::MovementProfile profile, synth::SynergyModel synergy, std::uint64_t seed)
      : gen_(std::move(profile), synergy, seed) {}
  std::optional<ElectrodeFrame> next() override { return gen_.next(); }

private:
  synth::EmgSynthesizer gen_;
};

class ReplaySource final : public SampleSource {
public:
  explicit ReplaySource(std::vector<ElectrodeFrame> frames) : frames_(std::move(frames)) {}
  std::optional<ElectrodeFrame> next() override {
    if (pos_ >= frames_.size()) {
      return std::nullopt;
    }
    return frames_[pos_++];
  }

private:
  std::vector<ElectrodeFrame> frames_;
  std::size_t pos_ = 0;
};

/// expand -> filter -> MAV, one electrode sample at a time.
class FeatureChain {
public:
  explicit FeatureChain(dsp::FilterVariant variant) : filter_(variant) {}

  /// Returns the new feature frame on every 40th sample.
  std::optional<FeatureFrame> push(const ElectrodeFrame &sample);

private:
  dsp::FilterModel filter_;
  dsp::MavWindow window_;
};

inline constexpr int kUpdatePeriodMs = 40;

struct PipelineConfig {
  dsp::FilterVariant filter = dsp::FilterVariant::LowCost;
  int update_period_ms = kUpdatePeriodMs;
  std::size_t queue_capacity = 1024; // samples
  /// Producer and consumer on separate threads. The single-threaded mode
  /// yields the same decoded trace.
  bool threaded = true;
  /// Pace the producer at 1 kHz of wall time; the queue then drops the oldest
  /// samples when full instead of blocking the producer.
  bool wall_clock = false;

  void validate() const;
};

struct TimingReport {
  std::vector<double> latencies_ms; // compute time of each control cycle
  double mean = 0.0;
  double p50 = 0.0;
  double p99 = 0.0;
  double max = 0.0;
  std::size_t missed_deadline_count = 0;
  std::size_t dropped_sample_count = 0;

  std::size_t cycles() const { return latencies_ms.size(); }
  static TimingReport from_latencies(std::vector<double> latencies_ms, std::size_t dropped);
};

/// Nearest-rank percentile: the ceil(p/100 * n)-th smallest value.
double percentile(std::vector<double> values, double p);

struct PipelineResult {
  std::vector<std::int64_t> t_ms;
  evalkit::Trace trace;
  TimingReport timing;
};

/// Runs floor(duration_ms / 40) control cycles or until the source runs dry.
/// The model is reset before the first cycle.
PipelineResult run_pipeline(const PipelineConfig &config, SampleSource &source,
                            decoder::KalmanModel model, std::int64_t duration_ms);

/// Synthesizes EMG for the profile, runs the feature chain and logs one row
/// per feature frame. With a destination, also writes the .meta and .raw
/// sidecars.
datastore::SessionLog record_training_session(const synth::MovementProfile &profile,
                                              const synth::SynergyModel &synergy,
                                              dsp::FilterVariant variant, std::uint64_t seed,
                                              const std::optional<std::filesystem::path> &destination = {});

/// CSV: t_ms,kin<d>... with one column per decoded DOF index.
void write_trace_csv(std::ostream &os, const PipelineResult &result,
                     const std::vector<std::size_t> &dofs);
void write_timing(std::ostream &os, const TimingReport &report);

} // namespace myo::runtime
