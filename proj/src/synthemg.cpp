// SPDX-License-Identifier: Apache-2.0
#include "myo/synthemg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace myo::synth {

namespace {

constexpr std::size_t kPrerollSamples = 2000;
constexpr std::size_t kImpulseLength = 1 << 15;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<dsp::Biquad> band_sections() {
  const double fs = kSampleRateHz;
  std::vector<dsp::Biquad> sections;
  sections.push_back(dsp::design_highpass(kBandLowHz, fs, dsp::butterworth_section_qs(2)[0]));
  for (double q : dsp::butterworth_section_qs(4)) {
    sections.push_back(dsp::design_lowpass(kBandHighHz, fs, q));
  }
  return sections;
}

// Values at 25 Hz frame offsets of one trapezoid excursion to `peak`.
void append_trapezoid(MovementProfile &p, std::size_t dof, double peak, double rise_s,
                      double hold_s) {
  const auto n = static_cast<std::size_t>(std::lround((2.0 * rise_s + hold_s) * kFrameRateHz));
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kFrameRateHz;
    double v;
    if (t < rise_s) {
      v = t / rise_s;
    } else if (t < rise_s + hold_s) {
      v = 1.0;
    } else {
      v = std::max(0.0, 1.0 - (t - rise_s - hold_s) / rise_s);
    }
    Kinematics k{};
    k[dof] = peak * v;
    p.trajectory.push_back(k);
    p.segment_labels.push_back(static_cast<int>(dof) + 1);
  }
}

void append_rest(MovementProfile &p, double rest_s) {
  const auto n = static_cast<std::size_t>(std::lround(rest_s * kFrameRateHz));
  p.trajectory.insert(p.trajectory.end(), n, Kinematics{});
  p.segment_labels.insert(p.segment_labels.end(), n, kRestLabel);
}

} // namespace

Movement parse_movement(std::string_view label) {
  const std::string s = trim(label);
  if (s.size() >= 4 && s[0] == 'D' && s[2] == '-' && s[1] >= '1' && s[1] <= '5') {
    const std::size_t digit = static_cast<std::size_t>(s[1] - '1');
    const std::string_view motion = std::string_view(s).substr(3);
    if (motion == "flex") return {digit, +1};
    if (motion == "ext") return {digit, -1};
    if (motion == "flex/ext") return {digit, 0};
    if (digit == 0) {
      if (motion == "abd") return {5, +1};
      if (motion == "add") return {5, -1};
      if (motion == "abd/add") return {5, 0};
    }
  }
  throw std::invalid_argument("unknown movement label '" + s + "'");
}

MovementSchedule six_movement_schedule(int repetitions) {
  MovementSchedule s;
  s.movements.assign(kDofLabels.begin(), kDofLabels.end());
  s.repetitions = repetitions;
  return s;
}

MovementSchedule parse_schedule(std::string_view text) {
  MovementSchedule s;
  s.movements.clear();
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto eol = text.find('\n');
    std::string line(text.substr(0, eol));
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("schedule line " + std::to_string(line_no) +
                                  ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    try {
      if (key == "movements") {
        std::string_view rest = value;
        while (!rest.empty()) {
          const auto comma = rest.find(',');
          const std::string item = trim(rest.substr(0, comma));
          if (!item.empty()) {
            parse_movement(item);
            s.movements.push_back(item);
          }
          rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        }
      } else if (key == "rise_s") {
        s.rise_s = std::stod(value);
      } else if (key == "hold_s") {
        s.hold_s = std::stod(value);
      } else if (key == "rest_s") {
        s.rest_s = std::stod(value);
      } else if (key == "repetitions") {
        s.repetitions = std::stoi(value);
      } else {
        throw std::invalid_argument("unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument &e) {
      throw std::invalid_argument("schedule line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return s;
}

std::vector<bool> MovementProfile::rest_mask() const {
  std::vector<bool> mask(segment_labels.size());
  std::transform(segment_labels.begin(), segment_labels.end(), mask.begin(),
                 [](int l) { return l == kRestLabel; });
  return mask;
}

MovementProfile make_profile(const MovementSchedule &schedule) {
  if (!(schedule.rise_s > 0.0) || !(schedule.hold_s > 0.0) || !(schedule.rest_s > 0.0)) {
    throw std::invalid_argument("rise_s, hold_s and rest_s must be positive");
  }
  if (schedule.repetitions < 0) {
    throw std::invalid_argument("repetitions must be non-negative");
  }
  std::vector<Movement> moves;
  for (const auto &label : schedule.movements) {
    moves.push_back(parse_movement(label));
  }

  MovementProfile p;
  std::copy(kDofLabels.begin(), kDofLabels.end(), p.dof_labels.begin());
  for (int rep = 0; rep < schedule.repetitions; ++rep) {
    for (const Movement &m : moves) {
      if (m.direction >= 0) {
        append_trapezoid(p, m.dof, 1.0, schedule.rise_s, schedule.hold_s);
        append_rest(p, schedule.rest_s);
      }
      if (m.direction <= 0) {
        append_trapezoid(p, m.dof, -1.0, schedule.rise_s, schedule.hold_s);
        append_rest(p, schedule.rest_s);
      }
    }
  }
  return p;
}

Kinematics interpolate_kinematics(const MovementProfile &profile, std::int64_t sample) {
  const auto &traj = profile.trajectory;
  if (traj.empty()) {
    return {};
  }
  const auto i0 = static_cast<std::size_t>(sample / kHopSamples);
  if (sample < 0) {
    return traj.front();
  }
  if (i0 + 1 >= traj.size()) {
    return traj.back();
  }
  const double f = static_cast<double>(sample % kHopSamples) / kHopSamples;
  Kinematics k;
  for (std::size_t d = 0; d < kDofs; ++d) {
    k[d] = (1.0 - f) * traj[i0][d] + f * traj[i0 + 1][d];
  }
  return k;
}

void SynergyModel::validate() const {
  for (std::size_t e = 0; e < kElectrodes; ++e) {
    if (!(rest_noise[e] > 0.0) || !std::isfinite(rest_noise[e])) {
      throw std::invalid_argument("rest noise amplitude must be positive on every electrode");
    }
    for (std::size_t d = 0; d < kDofs; ++d) {
      for (double g : gain[e][d]) {
        if (!(g >= 0.0) || !std::isfinite(g)) {
          throw std::invalid_argument("synergy gains must be finite and non-negative");
        }
      }
    }
  }
  for (std::size_t d = 0; d < kDofs; ++d) {
    for (std::size_t side : {Flexor, Extensor}) {
      const bool driven = std::any_of(gain.begin(), gain.end(),
                                      [&](const auto &row) { return row[d][side] > 0.0; });
      if (!driven) {
        throw std::invalid_argument("DOF " + std::to_string(d) +
                                    " has no electrode in one direction");
      }
    }
  }
}

SynergyModel SynergyModel::flexor_extensor(double gain, double rest_noise) {
  // Electrode subsets within a side: three singles and three pairs.
  static constexpr std::array<std::array<int, 2>, kDofs> kSupport{
      {{0, -1}, {1, -1}, {2, -1}, {0, 1}, {1, 2}, {0, 2}}};
  SynergyModel m;
  m.rest_noise.fill(rest_noise);
  for (std::size_t d = 0; d < kDofs; ++d) {
    for (int e : kSupport[d]) {
      if (e < 0) {
        continue;
      }
      m.gain[static_cast<std::size_t>(e)][d][Flexor] = gain;
      m.gain[static_cast<std::size_t>(e) + 3][d][Extensor] = gain;
    }
  }
  return m;
}

double amplitude(const SynergyModel &synergy, std::size_t electrode, const Kinematics &k) {
  double a = synergy.rest_noise[electrode];
  for (std::size_t d = 0; d < kDofs; ++d) {
    const auto side = k[d] >= 0.0 ? SynergyModel::Flexor : SynergyModel::Extensor;
    a += synergy.gain[electrode][d][side] * std::abs(k[d]);
  }
  return a;
}

double EmgSynthesizer::band_gain() {
  static const double gain = [] {
    dsp::SosCascade c(band_sections(), 1);
    double energy = 0.0;
    for (std::size_t n = 0; n < kImpulseLength; ++n) {
      const double h = c.process(0, n == 0 ? 1.0 : 0.0);
      energy += h * h;
    }
    return std::sqrt(energy);
  }();
  return gain;
}

EmgSynthesizer::EmgSynthesizer(MovementProfile profile, SynergyModel synergy, std::uint64_t seed)
    : profile_(std::move(profile)), synergy_(synergy), rng_(seed), band_(band_sections(), kElectrodes),
      scale_(1.0 / band_gain()),
      total_(profile_.frames() * static_cast<std::size_t>(kHopSamples)) {
  if (profile_.frames() == 0) {
    throw std::invalid_argument("cannot synthesize EMG for an empty profile");
  }
  synergy_.validate();
  for (std::size_t n = 0; n < kPrerollSamples; ++n) {
    for (std::size_t e = 0; e < kElectrodes; ++e) {
      band_noise(e);
    }
  }
}

double EmgSynthesizer::band_noise(std::size_t electrode) {
  return scale_ * band_.process(electrode, normal_(rng_));
}

std::optional<ElectrodeFrame> EmgSynthesizer::next() {
  if (pos_ >= total_) {
    return std::nullopt;
  }
  ElectrodeFrame f;
  f.t_ms = static_cast<std::int64_t>(pos_);
  const Kinematics k = interpolate_kinematics(profile_, f.t_ms);
  for (std::size_t e = 0; e < kElectrodes; ++e) {
    f.samples[e] = amplitude(synergy_, e, k) * band_noise(e);
  }
  ++pos_;
  return f;
}

std::vector<ElectrodeFrame> synthesize_emg(const MovementProfile &profile,
                                           const SynergyModel &synergy, std::uint64_t seed) {
  EmgSynthesizer gen(profile, synergy, seed);
  std::vector<ElectrodeFrame> out;
  out.reserve(gen.total_samples());
  while (auto f = gen.next()) {
    out.push_back(*f);
  }
  return out;
}

} // namespace myo::synth
