// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "myo/biquad.hpp"
#include "myo/types.hpp"

namespace myo::synth {

inline constexpr std::array<std::string_view, kDofs> kDofLabels{
    "D1-flex/ext", "D2-flex/ext", "D3-flex/ext", "D4-flex/ext", "D5-flex/ext", "D1-abd/add"};

/// Segment label of rest frames; movement frames carry dof index + 1.
inline constexpr int kRestLabel = 0;
inline constexpr double kFrameRateHz = 25.0;

/// One entry of a movement list. direction is +1 (flexion/abduction),
/// -1 (extension/adduction) or 0 for "both, flexion first".
struct Movement {
  std::size_t dof = 0;
  int direction = 0;
};

/// Parses "D3-flex", "D3-ext", "D3-flex/ext", "D1-abd", "D1-add", "D1-abd/add".
Movement parse_movement(std::string_view label);

struct MovementSchedule {
  std::vector<std::string> movements;
  double rise_s = 0.5;
  double hold_s = 2.0;
  double rest_s = 1.0;
  int repetitions = 1;
};

/// All six DOFs, each moved in both directions.
MovementSchedule six_movement_schedule(int repetitions = 1);

/// Key-value form, one `key = value` per line, '#' starts a comment:
///   movements = D1-flex/ext, D2-flex/ext
///   rise_s = 0.5
///   hold_s = 2
///   rest_s = 1
///   repetitions = 3
MovementSchedule parse_schedule(std::string_view text);

struct MovementProfile {
  std::array<std::string, kDofs> dof_labels;
  std::vector<Kinematics> trajectory; // 25 Hz, frame i at t = 40 * i ms
  std::vector<int> segment_labels;

  std::size_t frames() const { return trajectory.size(); }
  std::int64_t duration_ms() const {
    return static_cast<std::int64_t>(trajectory.size()) * kHopSamples;
  }
  std::vector<bool> rest_mask() const;
};

/// Trapezoids (rise to +-1, hold, fall back to 0) one DOF at a time, each
/// followed by a rest segment. Throws std::invalid_argument on unknown
/// labels or non-positive durations.
MovementProfile make_profile(const MovementSchedule &schedule);

/// Linear interpolation of the 25 Hz trajectory at a 1 kHz sample index.
Kinematics interpolate_kinematics(const MovementProfile &profile, std::int64_t sample);

struct SynergyModel {
  enum Side : std::size_t { Flexor = 0, Extensor = 1 };

  // gain[electrode][dof][side]: activation gain for positive (flexor side)
  // and negative (extensor side) excursions of the DOF.
  std::array<std::array<std::array<double, 2>, kDofs>, kElectrodes> gain{};
  std::array<double, kElectrodes> rest_noise{};

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;

  /// Flexion drives electrodes 0-2, extension drives electrodes 3-5; each DOF
  /// direction excites a distinct subset of its side.
  static SynergyModel flexor_extensor(double gain = 40.0, double rest_noise = 5.0);
};

/// Envelope a_e = rest_e + sum_d gain[e][d][dir(k_d)] * |k_d|.
double amplitude(const SynergyModel &synergy, std::size_t electrode, const Kinematics &k);

/// Amplitude-modulated band-limited (20-450 Hz) unit-variance Gaussian noise.
/// Single consumer; identical inputs and seed give a bit-identical stream.
class EmgSynthesizer {
public:
  EmgSynthesizer(MovementProfile profile, SynergyModel synergy, std::uint64_t seed);

  std::optional<ElectrodeFrame> next();
  std::size_t total_samples() const { return total_; }
  std::size_t position() const { return pos_; }

  /// L2 norm of the band-limiting filter's impulse response (noise gain).
  static double band_gain();

private:
  double band_noise(std::size_t electrode);

  MovementProfile profile_;
  SynergyModel synergy_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
  dsp::SosCascade band_;
  double scale_;
  std::size_t total_;
  std::size_t pos_ = 0;
};

std::vector<ElectrodeFrame> synthesize_emg(const MovementProfile &profile,
                                           const SynergyModel &synergy, std::uint64_t seed);

inline constexpr double kBandLowHz = 20.0;
inline constexpr double kBandHighHz = 450.0;

} // namespace myo::synth
