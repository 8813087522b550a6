// SPDX-License-Identifier: Apache-2.0
#include "myo/runtime.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "myo/bounded_queue.hpp"
#include "myo/error.hpp"

namespace myo::runtime {

std::optional<FeatureFrame> FeatureChain::push(const ElectrodeFrame &sample) {
  ChannelFrame ch = dsp::expand_channels(sample);
  filter_.filter_channels(ch.channels);
  if (window_.push(ch)) {
    return window_.latest();
  }
  return std::nullopt;
}

void PipelineConfig::validate() const {
  if (update_period_ms != kUpdatePeriodMs) {
    throw std::invalid_argument("update period is fixed at 40 ms");
  }
  if (queue_capacity < 2 * static_cast<std::size_t>(kHopSamples)) {
    throw std::invalid_argument("queue capacity must hold at least two update windows");
  }
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) {
    return 0.0;
  }
  if (!(p > 0.0 && p <= 100.0)) {
    throw std::invalid_argument("percentile must lie in (0, 100]");
  }
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size())));
  const auto nth = values.begin() + static_cast<std::ptrdiff_t>(std::max<std::size_t>(rank, 1) - 1);
  std::nth_element(values.begin(), nth, values.end());
  return *nth;
}

TimingReport TimingReport::from_latencies(std::vector<double> latencies_ms, std::size_t dropped) {
  TimingReport r;
  r.dropped_sample_count = dropped;
  if (!latencies_ms.empty()) {
    r.mean = std::accumulate(latencies_ms.begin(), latencies_ms.end(), 0.0) /
             static_cast<double>(latencies_ms.size());
    r.p50 = percentile(latencies_ms, 50.0);
    r.p99 = percentile(latencies_ms, 99.0);
    r.max = *std::max_element(latencies_ms.begin(), latencies_ms.end());
    r.missed_deadline_count = static_cast<std::size_t>(
        std::count_if(latencies_ms.begin(), latencies_ms.end(),
                      [](double l) { return l > static_cast<double>(kUpdatePeriodMs); }));
  }
  r.latencies_ms = std::move(latencies_ms);
  return r;
}

namespace {

using Clock = std::chrono::steady_clock;

// Consumer stage: owns the DSP chain and the decoder.
class ControlLoop {
public:
  ControlLoop(dsp::FilterVariant variant, decoder::KalmanModel model, std::size_t cycles)
      : chain_(variant), model_(std::move(model)), cycles_(cycles) {
    model_.reset();
    block_.reserve(kHopSamples);
    result_.trace.reserve(cycles);
    result_.t_ms.reserve(cycles);
    latencies_.reserve(cycles);
  }

  bool done() const { return result_.trace.size() >= cycles_; }

  void push(const ElectrodeFrame &f) {
    block_.push_back(f);
    if (block_.size() == static_cast<std::size_t>(kHopSamples)) {
      run_cycle();
    }
  }

  PipelineResult finish(std::size_t dropped) {
    result_.timing = TimingReport::from_latencies(std::move(latencies_), dropped);
    return std::move(result_);
  }

private:
  void run_cycle() {
    const auto start = Clock::now();
    std::optional<FeatureFrame> feature;
    for (const auto &s : block_) {
      if (auto f = chain_.push(s)) {
        feature = f;
      }
    }
    block_.clear();
    if (!feature) {
      throw std::logic_error("control cycle finished without a feature frame");
    }
    const FeatureFrame corrected = dsp::subtract_baseline(*feature, model_.baseline());
    result_.trace.push_back(model_.predict_step(corrected));
    result_.t_ms.push_back(feature->t_ms);
    latencies_.push_back(std::chrono::duration<double, std::milli>(Clock::now() - start).count());
  }

  FeatureChain chain_;
  decoder::KalmanModel model_;
  std::size_t cycles_;
  std::vector<ElectrodeFrame> block_;
  std::vector<double> latencies_;
  PipelineResult result_;
};

} // namespace

PipelineResult run_pipeline(const PipelineConfig &config, SampleSource &source,
                            decoder::KalmanModel model, std::int64_t duration_ms) {
  config.validate();
  if (duration_ms < 0) {
    throw std::invalid_argument("duration must be non-negative");
  }
  const auto cycles = static_cast<std::size_t>(duration_ms / kUpdatePeriodMs);
  const std::size_t samples = cycles * static_cast<std::size_t>(kHopSamples);
  ControlLoop loop(config.filter, std::move(model), cycles);

  if (!config.threaded) {
    for (std::size_t i = 0; i < samples; ++i) {
      auto f = source.next();
      if (!f) {
        break;
      }
      loop.push(*f);
    }
    return loop.finish(0);
  }

  BoundedQueue<ElectrodeFrame> queue(config.queue_capacity, config.wall_clock
                                                                ? Backpressure::DropOldest
                                                                : Backpressure::Block);
  std::exception_ptr producer_error;
  std::jthread producer([&] {
    try {
      const auto start = Clock::now();
      for (std::size_t i = 0; i < samples; ++i) {
        if (config.wall_clock) {
          std::this_thread::sleep_until(start + std::chrono::milliseconds(i));
        }
        auto f = source.next();
        if (!f) {
          break;
        }
        queue.push(*f);
      }
    } catch (...) {
      producer_error = std::current_exception();
    }
    queue.close();
  });

  std::exception_ptr consumer_error;
  try {
    while (auto f = queue.pop()) {
      loop.push(*f);
    }
  } catch (...) {
    consumer_error = std::current_exception();
    queue.close();
  }
  producer.join();
  if (consumer_error) {
    std::rethrow_exception(consumer_error);
  }
  if (producer_error) {
    std::rethrow_exception(producer_error);
  }
  return loop.finish(queue.dropped());
}

datastore::SessionLog record_training_session(const synth::MovementProfile &profile,
                                              const synth::SynergyModel &synergy,
                                              dsp::FilterVariant variant, std::uint64_t seed,
                                              const std::optional<std::filesystem::path> &destination) {
  const std::vector<ElectrodeFrame> samples = synth::synthesize_emg(profile, synergy, seed);

  datastore::SessionLog log;
  log.meta.seed = seed;
  log.meta.filter = variant;
  log.meta.dof_labels = profile.dof_labels;
  if (destination) {
    log.meta.session_id = destination->stem().string();
  }

  FeatureChain chain(variant);
  for (const auto &s : samples) {
    auto f = chain.push(s);
    if (!f) {
      continue;
    }
    const std::size_t frame = log.rows.size();
    datastore::SessionRow row;
    row.t_ms = f->t_ms;
    for (std::size_t e = 0; e < kElectrodes; ++e) {
      row.raw[e] = datastore::adc_code(s.samples[e]);
    }
    row.mav = f->mav;
    row.kin = profile.trajectory[frame];
    row.label = profile.segment_labels[frame];
    log.rows.push_back(row);
  }

  if (destination) {
    datastore::write_session(log, *destination);
    datastore::write_raw_stream(datastore::raw_path(*destination), samples);
  }
  return log;
}

void write_trace_csv(std::ostream &os, const PipelineResult &result,
                     const std::vector<std::size_t> &dofs) {
  os << "t_ms";
  for (auto d : dofs) {
    os << ",kin" << d;
  }
  os << '\n';
  char buf[32];
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    os << result.t_ms[i];
    for (double v : result.trace[i]) {
      std::snprintf(buf, sizeof buf, "%.4f", v);
      os << ',' << (std::string_view(buf) == "-0.0000" ? "0.0000" : buf);
    }
    os << '\n';
  }
}

void write_timing(std::ostream &os, const TimingReport &r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "cycles %zu\nmean_ms %.4f\np50_ms %.4f\np99_ms %.4f\nmax_ms %.4f\n"
                "missed_deadlines %zu\ndropped_samples %zu\n",
                r.cycles(), r.mean, r.p50, r.p99, r.max, r.missed_deadline_count,
                r.dropped_sample_count);
  os << buf;
}

} // namespace myo::runtime
