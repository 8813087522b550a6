// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <numbers>
#include <set>

#include "myo/synthemg.hpp"
#include "oracles.hpp"

using namespace myo;
using namespace myo::synth;

namespace {

MovementSchedule single(std::string label, int reps = 1) {
  MovementSchedule s;
  s.movements = {std::move(label)};
  s.repetitions = reps;
  return s;
}

// Constant-kinematics profile of `frames` frames.
MovementProfile constant_profile(Kinematics k, std::size_t frames) {
  MovementProfile p;
  std::copy(kDofLabels.begin(), kDofLabels.end(), p.dof_labels.begin());
  p.trajectory.assign(frames, k);
  p.segment_labels.assign(frames, k == Kinematics{} ? kRestLabel : 1);
  return p;
}

} // namespace

TEST(ParseMovement, Labels) {
  EXPECT_EQ(parse_movement("D1-flex").dof, 0u);
  EXPECT_EQ(parse_movement("D1-flex").direction, 1);
  EXPECT_EQ(parse_movement("D5-ext").dof, 4u);
  EXPECT_EQ(parse_movement("D5-ext").direction, -1);
  EXPECT_EQ(parse_movement(" D3-flex/ext ").direction, 0);
  EXPECT_EQ(parse_movement("D1-abd").dof, 5u);
  EXPECT_EQ(parse_movement("D1-add").direction, -1);
  EXPECT_EQ(parse_movement("D1-abd/add").dof, 5u);
  for (const char *bad : {"", "D6-flex", "D2-abd", "D0-ext", "d1-flex", "D1-bend", "D1flex"}) {
    EXPECT_THROW(parse_movement(bad), std::invalid_argument) << bad;
  }
}

TEST(MakeProfile, ZeroRepetitionsIsEmpty) {
  const auto p = make_profile(six_movement_schedule(0));
  EXPECT_EQ(p.frames(), 0u);
  EXPECT_TRUE(p.segment_labels.empty());
  EXPECT_EQ(p.duration_ms(), 0);
}

TEST(MakeProfile, SingleFlexionTrapezoid) {
  const auto p = make_profile(single("D1-flex"));
  // 0.5 s rise + 2 s hold + 0.5 s fall + 1 s rest at 25 Hz.
  ASSERT_EQ(p.frames(), 100u);
  for (std::size_t i = 0; i < p.frames(); ++i) {
    const double t = static_cast<double>(i) * 0.04;
    double expected;
    if (t < 0.5) {
      expected = t / 0.5;
    } else if (t < 2.5) {
      expected = 1.0;
    } else if (t < 3.0) {
      expected = 1.0 - (t - 2.5) / 0.5;
    } else {
      expected = 0.0;
    }
    EXPECT_NEAR(p.trajectory[i][0], expected, 1e-12) << "frame " << i;
    for (std::size_t d = 1; d < kDofs; ++d) EXPECT_EQ(p.trajectory[i][d], 0.0);
    EXPECT_EQ(p.segment_labels[i], i < 75 ? 1 : kRestLabel);
  }
  EXPECT_EQ(p.trajectory[12][0], 0.96);
  EXPECT_EQ(p.trajectory[13][0], 1.0);
  EXPECT_EQ(p.trajectory[62][0], 1.0);
}

TEST(MakeProfile, AllSixMovements) {
  const auto p = make_profile(six_movement_schedule(1));
  std::set<int> ids;
  for (int l : p.segment_labels)
    if (l != kRestLabel) ids.insert(l);
  EXPECT_EQ(ids.size(), 6u);
  EXPECT_NE(std::find(p.segment_labels.begin(), p.segment_labels.end(), kRestLabel),
            p.segment_labels.end());
  std::set<std::string> names(p.dof_labels.begin(), p.dof_labels.end());
  EXPECT_EQ(names.size(), 6u);
}

TEST(MakeProfile, Invariants) {
  const auto p = make_profile(six_movement_schedule(2));
  ASSERT_EQ(p.segment_labels.size(), p.frames());
  const auto rest = p.rest_mask();
  bool saw_neg = false;
  for (std::size_t i = 0; i < p.frames(); ++i) {
    int active = 0;
    for (std::size_t d = 0; d < kDofs; ++d) {
      const double v = p.trajectory[i][d];
      EXPECT_GE(v, -1.0);
      EXPECT_LE(v, 1.0);
      if (v != 0.0) ++active;
      if (v < 0.0) saw_neg = true;
      if (rest[i]) EXPECT_EQ(v, 0.0);
    }
    EXPECT_LE(active, 1);
  }
  EXPECT_TRUE(saw_neg);
}

TEST(MakeProfile, Deterministic) {
  const auto a = make_profile(six_movement_schedule(3));
  const auto b = make_profile(six_movement_schedule(3));
  EXPECT_EQ(a.trajectory, b.trajectory);
  EXPECT_EQ(a.segment_labels, b.segment_labels);
}

TEST(MakeProfile, Errors) {
  auto s = single("D1-flex");
  s.hold_s = 0.0;
  EXPECT_THROW(make_profile(s), std::invalid_argument);
  s = single("D1-flex");
  s.rise_s = -1.0;
  EXPECT_THROW(make_profile(s), std::invalid_argument);
  s = single("D1-flex");
  s.rest_s = 0.0;
  EXPECT_THROW(make_profile(s), std::invalid_argument);
  EXPECT_THROW(make_profile(single("D7-flex")), std::invalid_argument);
}

TEST(ParseSchedule, KeyValue) {
  const auto s = parse_schedule("# demo\nmovements = D2-flex, D1-abd/add\nrise_s = 0.25\n"
                                "hold_s=1 # inline\nrest_s = 0.5\nrepetitions = 4\n");
  EXPECT_EQ(s.movements, (std::vector<std::string>{"D2-flex", "D1-abd/add"}));
  EXPECT_EQ(s.rise_s, 0.25);
  EXPECT_EQ(s.hold_s, 1.0);
  EXPECT_EQ(s.rest_s, 0.5);
  EXPECT_EQ(s.repetitions, 4);
  EXPECT_THROW(parse_schedule("movements = D9-flex\n"), std::invalid_argument);
  EXPECT_THROW(parse_schedule("speed = 3\n"), std::invalid_argument);
  EXPECT_THROW(parse_schedule("just words\n"), std::invalid_argument);
}

TEST(Interpolation, LinearBetweenFrames) {
  const auto p = make_profile(single("D1-flex"));
  const auto k = interpolate_kinematics(p, 20); // halfway between frames 0 and 1
  EXPECT_NEAR(k[0], 0.04, 1e-15);
  EXPECT_EQ(interpolate_kinematics(p, 40)[0], p.trajectory[1][0]);
  EXPECT_EQ(interpolate_kinematics(p, 1'000'000)[0], p.trajectory.back()[0]);
}

TEST(Synergy, DefaultSatisfiesInvariants) {
  const auto m = SynergyModel::flexor_extensor();
  EXPECT_NO_THROW(m.validate());
  for (std::size_t e = 0; e < kElectrodes; ++e) {
    for (std::size_t d = 0; d < kDofs; ++d) {
      // Flexion only on 0-2, extension only on 3-5.
      if (e < 3) EXPECT_EQ(m.gain[e][d][SynergyModel::Extensor], 0.0);
      else EXPECT_EQ(m.gain[e][d][SynergyModel::Flexor], 0.0);
    }
  }
}

TEST(Synergy, InvalidModelsRejected) {
  auto m = SynergyModel::flexor_extensor();
  m.rest_noise[2] = 0.0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m = SynergyModel::flexor_extensor();
  m.gain[0][0][0] = -1.0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m = SynergyModel::flexor_extensor();
  for (auto &row : m.gain) row[4][SynergyModel::Extensor] = 0.0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  EXPECT_THROW(EmgSynthesizer(constant_profile({}, 10), m, 1), std::invalid_argument);
}

TEST(Synergy, AmplitudeMonotoneInExcursion) {
  const auto m = SynergyModel::flexor_extensor();
  for (std::size_t e = 0; e < kElectrodes; ++e) {
    for (std::size_t d = 0; d < kDofs; ++d) {
      for (double sign : {1.0, -1.0}) {
        double prev = -1.0;
        for (int i = 0; i <= 100; ++i) {
          Kinematics k{};
          k[d] = sign * i / 100.0;
          const double a = amplitude(m, e, k);
          EXPECT_GE(a, prev);
          prev = a;
        }
      }
    }
  }
  EXPECT_EQ(amplitude(m, 0, Kinematics{1, 0, 0, 0, 0, 0}), 45.0);
  EXPECT_EQ(amplitude(m, 3, Kinematics{1, 0, 0, 0, 0, 0}), 5.0);
  EXPECT_EQ(amplitude(m, 3, Kinematics{-1, 0, 0, 0, 0, 0}), 45.0);
}

TEST(Synthesize, EmptyProfileRejected) {
  EXPECT_THROW(synthesize_emg(make_profile(six_movement_schedule(0)), SynergyModel::flexor_extensor(), 1),
               std::invalid_argument);
}

TEST(Synthesize, DeterministicAndSeedSensitive) {
  const auto p = make_profile(single("D2-flex/ext"));
  const auto m = SynergyModel::flexor_extensor();
  const auto a = synthesize_emg(p, m, 42);
  const auto b = synthesize_emg(p, m, 42);
  const auto c = synthesize_emg(p, m, 43);
  ASSERT_EQ(a.size(), b.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].t_ms, b[i].t_ms);
    ASSERT_EQ(a[i].samples, b[i].samples);
    differs = differs || a[i].samples != c[i].samples;
  }
  EXPECT_TRUE(differs);
}

TEST(Synthesize, StreamLengthAndCadence) {
  const auto p = make_profile(six_movement_schedule(1));
  const auto out = synthesize_emg(p, SynergyModel::flexor_extensor(), 7);
  const auto expected = static_cast<double>(p.duration_ms());
  EXPECT_NEAR(static_cast<double>(out.size()), expected, 1.0);
  for (std::size_t i = 0; i < out.size(); ++i) ASSERT_EQ(out[i].t_ms, static_cast<std::int64_t>(i));
}

TEST(Synthesize, RestMavMatchesFoldedNormal) {
  auto m = SynergyModel::flexor_extensor();
  m.rest_noise = {5.0, 2.0, 1.0, 3.0, 8.0, 0.5};
  const auto frames = synthesize_emg(constant_profile({}, 25'000), m, 99); // 10^6 samples
  for (std::size_t e = 0; e < kElectrodes; ++e) {
    double sum = 0;
    for (const auto &f : frames) sum += std::abs(f.samples[e]);
    const double mav = sum / static_cast<double>(frames.size());
    const double expected = oracle::folded_normal_mean(m.rest_noise[e], 1'000'000, 17 + e);
    EXPECT_NEAR(mav, expected, 0.05 * expected) << "electrode " << e;
    EXPECT_NEAR(expected, m.rest_noise[e] * std::sqrt(2.0 / std::numbers::pi), 0.01 * expected);
  }
}

TEST(Synthesize, ActiveFlexionMav) {
  const auto m = SynergyModel::flexor_extensor();
  Kinematics k{};
  k[0] = 1.0;
  const auto frames = synthesize_emg(constant_profile(k, 25'000), m, 5);
  double sum0 = 0, sum3 = 0;
  for (const auto &f : frames) {
    sum0 += std::abs(f.samples[0]);
    sum3 += std::abs(f.samples[3]);
  }
  const double n = static_cast<double>(frames.size());
  const double g = m.gain[0][0][SynergyModel::Flexor];
  const double expected0 = oracle::folded_normal_mean(m.rest_noise[0] + g, 1'000'000, 3);
  EXPECT_NEAR(sum0 / n, expected0, 0.05 * expected0);
  const double expected3 = oracle::folded_normal_mean(m.rest_noise[3], 1'000'000, 4);
  EXPECT_NEAR(sum3 / n, expected3, 0.05 * expected3);
}

TEST(Synthesize, RestNoiseIsBandLimited) {
  auto m = SynergyModel::flexor_extensor();
  const auto frames = synthesize_emg(constant_profile({}, 2048 / 40 * 16), m, 12);
  std::vector<double> x;
  for (const auto &f : frames) x.push_back(f.samples[1]);
  EXPECT_LT(oracle::power_fraction_above(x, 475.0, 1000.0), 0.01);
  // and the pass band really carries the power
  EXPECT_GT(1.0 - oracle::power_fraction_above(x, 20.0, 1000.0), 0.0);
  EXPECT_LT(1.0 - oracle::power_fraction_above(x, 20.0, 1000.0), 0.05);
}

TEST(Synthesize, UnitVarianceBandNoise) {
  auto m = SynergyModel::flexor_extensor();
  m.rest_noise.fill(1.0);
  const auto frames = synthesize_emg(constant_profile({}, 10'000), m, 8);
  double ss = 0;
  for (const auto &f : frames) ss += f.samples[4] * f.samples[4];
  EXPECT_NEAR(ss / static_cast<double>(frames.size()), 1.0, 0.03);
}
