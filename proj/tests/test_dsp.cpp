// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "myo/dsp.hpp"
#include "oracles.hpp"

using namespace myo;
using namespace myo::dsp;

namespace {

ElectrodeFrame electrodes(std::array<double, kElectrodes> s, std::int64_t t = 0) {
  ElectrodeFrame f;
  f.t_ms = t;
  f.samples = s;
  return f;
}

} // namespace

TEST(ExpandChannels, PairOrderingAndCount) {
  const auto out = expand_channels(electrodes({1, 2, 3, 4, 5, 6}));
  ASSERT_EQ(out.channels.size(), 21u);
  for (std::size_t e = 0; e < 6; ++e) EXPECT_EQ(out.channels[e], e + 1.0);
  EXPECT_EQ(out.channels[6], -1.0);  // (0,1)
  EXPECT_EQ(out.channels[20], -1.0); // (4,5)
  std::size_t p = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = i + 1; j < 6; ++j, ++p) {
      EXPECT_EQ(pair_electrodes(p), std::make_pair(i, j));
      EXPECT_EQ(out.channels[6 + p], static_cast<double>(i) - static_cast<double>(j));
    }
  }
}

TEST(ExpandChannels, ConstantInputCancelsOnPairs) {
  const auto out = expand_channels(electrodes({3.25, 3.25, 3.25, 3.25, 3.25, 3.25}));
  for (std::size_t c = 6; c < 21; ++c) EXPECT_EQ(out.channels[c], 0.0);
}

TEST(ExpandChannels, CommonModeRejectionProperty) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-500.0, 500.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::array<double, kElectrodes> s{};
    for (auto &v : s) v = u(rng);
    // Power-of-two common mode keeps the additions exact.
    const double m = std::ldexp(1.0, static_cast<int>(u(rng)) % 8);
    auto shifted = s;
    for (auto &v : shifted) v += m;
    const auto a = expand_channels(electrodes(s));
    const auto b = expand_channels(electrodes(shifted));
    for (std::size_t c = 6; c < 21; ++c) {
      ASSERT_NEAR(a.channels[c], b.channels[c], 1e-12 * (1.0 + std::abs(a.channels[c])));
    }
  }
}

TEST(ExpandChannels, PairsAntisymmetricUnderSwap) {
  std::array<double, kElectrodes> s{0.5, -2, 7, 1, 3, -4};
  auto swapped = s;
  std::swap(swapped[1], swapped[3]);
  const auto a = expand_channels(electrodes(s));
  const auto b = expand_channels(electrodes(swapped));
  // pair (1,3) is index 5 + ... find it
  for (std::size_t p = 0; p < kPairs; ++p) {
    if (pair_electrodes(p) == std::make_pair<std::size_t, std::size_t>(1, 3)) {
      EXPECT_EQ(a.channels[6 + p], -b.channels[6 + p]);
    }
  }
}

TEST(ExpandChannels, WrongElectrodeCountThrows) {
  const std::vector<double> five(5, 1.0);
  EXPECT_THROW(expand_channels(0, five), std::invalid_argument);
  const std::vector<double> six(6, 1.0);
  EXPECT_NO_THROW(expand_channels(0, six));
}

TEST(Filter, SectionsStable) {
  for (auto v : {FilterVariant::LowCost, FilterVariant::ResearchGrade}) {
    const auto f = make_filter(v);
    EXPECT_TRUE(f.stable());
    EXPECT_EQ(f.channel_count(), 21u);
  }
  EXPECT_EQ(make_filter(FilterVariant::LowCost).sections().size(), 1u);
  EXPECT_EQ(make_filter(FilterVariant::ResearchGrade).sections().size(), 5u);
}

TEST(Filter, LowCostCoefficientsMatchButterworthDesign) {
  // scipy.signal.butter(2, 55, 'high', fs=1000)
  const auto filter = make_filter(FilterVariant::LowCost);
  const auto q = filter.sections().front();
  EXPECT_NEAR(q.b0, 0.7829138266577251, 1e-12);
  EXPECT_NEAR(q.b1, -1.5658276533154503, 1e-12);
  EXPECT_NEAR(q.b2, 0.7829138266577251, 1e-12);
  EXPECT_NEAR(q.a1, -1.5181325407176285, 1e-12);
  EXPECT_NEAR(q.a2, 0.6135227659132724, 1e-12);
}

TEST(Filter, ZeroInputFromResetStateGivesZero) {
  auto f = make_filter(FilterVariant::ResearchGrade);
  ChannelFrame zero;
  for (int n = 0; n < 2000; ++n) {
    const auto out = f.filter_frame(zero);
    for (double v : out.channels) ASSERT_EQ(v, 0.0);
  }
}

TEST(Filter, Linearity) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  auto f1 = make_filter(FilterVariant::ResearchGrade);
  auto f2 = make_filter(FilterVariant::ResearchGrade);
  const double alpha = 4.0; // power of two: scaling commutes exactly
  for (int i = 0; i < 5000; ++i) {
    ChannelFrame x;
    for (auto &v : x.channels) v = n(rng);
    ChannelFrame ax = x;
    for (auto &v : ax.channels) v *= alpha;
    const auto y = f1.filter_frame(x);
    const auto ay = f2.filter_frame(ax);
    for (std::size_t c = 0; c < kChannels; ++c) ASSERT_EQ(ay.channels[c], alpha * y.channels[c]);
  }
}

TEST(Filter, ImpulseMatchesDirectDifferenceEquation) {
  for (auto v : {FilterVariant::LowCost, FilterVariant::ResearchGrade}) {
    auto f = make_filter(v);
    std::vector<double> impulse(512, 0.0);
    impulse[0] = 1.0;
    const auto expected = oracle::difference_equation(f.sections(), impulse);
    for (std::size_t n = 0; n < impulse.size(); ++n) {
      ChannelFrame x;
      x.channels.fill(impulse[n]);
      const auto y = f.filter_frame(x);
      for (double c : y.channels) {
        if (v == FilterVariant::LowCost) {
          ASSERT_EQ(c, expected[n]) << "sample " << n;
        } else {
          ASSERT_NEAR(c, expected[n], 1e-12) << "sample " << n;
        }
      }
    }
  }
}

TEST(Filter, ResetReproducesOutput) {
  auto f = make_filter(FilterVariant::ResearchGrade);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  std::vector<ChannelFrame> input(300);
  for (auto &x : input)
    for (auto &v : x.channels) v = n(rng);
  std::vector<ChannelFrame> first, second;
  for (const auto &x : input) first.push_back(f.filter_frame(x));
  f.reset();
  for (const auto &x : input) second.push_back(f.filter_frame(x));
  for (std::size_t i = 0; i < input.size(); ++i) EXPECT_EQ(first[i].channels, second[i].channels);
}

TEST(Filter, ChannelCountMismatchThrows) {
  auto f = make_filter(FilterVariant::LowCost);
  std::vector<double> twenty(20, 0.0);
  EXPECT_THROW(f.filter_channels(twenty), std::invalid_argument);
}

TEST(Filter, ToneResponse) {
  auto gain = [](FilterVariant v, double hz) {
    auto f = make_filter(v);
    auto run = [&f](double x) {
      ChannelFrame c;
      c.channels.fill(x);
      return f.filter_frame(c).channels[0];
    };
    return oracle::tone_gain(run, hz, 1000.0, 5000, 4000);
  };
  const auto research = make_filter(FilterVariant::ResearchGrade).sections();
  for (double hz : {60.0, 120.0, 180.0}) {
    const double g = gain(FilterVariant::ResearchGrade, hz);
    EXPECT_LE(oracle::to_db(g), -20.0) << hz << " Hz";
  }
  for (double hz : {100.0, 40.0, 250.0}) {
    const double measured = gain(FilterVariant::ResearchGrade, hz);
    EXPECT_NEAR(oracle::to_db(measured), 0.0, 3.0) << hz << " Hz";
    EXPECT_NEAR(measured, oracle::analytic_gain(research, hz, 1000.0), 1e-6);
  }
  // DC through the low-cost high-pass.
  auto f = make_filter(FilterVariant::LowCost);
  double y = 0;
  for (int n = 0; n < 5000; ++n) {
    ChannelFrame c;
    c.channels.fill(1.0);
    y = f.filter_frame(c).channels[0];
  }
  EXPECT_LE(oracle::to_db(std::abs(y) + 1e-300), -40.0);
}

TEST(Filter, BoundedOverLongRun) {
  // 10^7 samples of bounded input on one channel lane of each variant.
  for (auto v : {FilterVariant::LowCost, FilterVariant::ResearchGrade}) {
    auto sections = make_filter(v).sections();
    SosCascade c(sections, 1);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double peak = 0.0;
    for (int n = 0; n < 10'000'000; ++n) peak = std::max(peak, std::abs(c.process(0, u(rng))));
    EXPECT_TRUE(std::isfinite(peak));
    EXPECT_LT(peak, 20.0);
  }
}

TEST(Filter, CoefficientExport) {
  std::ostringstream os;
  make_filter(FilterVariant::ResearchGrade).write_coefficients(os);
  const std::string text = os.str();
  EXPECT_NE(text.find("# filter research fs 1000 sections 5"), std::string::npos);
  EXPECT_NE(text.find("section 4 b "), std::string::npos);
}

TEST(Mav, ConstantAndAlternatingInput) {
  MavWindow w;
  for (int n = 0; n < 600; ++n) {
    ChannelFrame f;
    f.t_ms = n;
    f.channels.fill(n % 2 ? 2.5 : -2.5);
    f.channels[0] = -1.75;
    if (w.push(f) && n >= 300) {
      EXPECT_DOUBLE_EQ(w.latest().mav[0], 1.75);
      EXPECT_DOUBLE_EQ(w.latest().mav[1], 2.5);
    }
  }
}

TEST(Mav, CadenceAndTimestamps) {
  std::vector<ChannelFrame> frames(10'000);
  for (std::size_t i = 0; i < frames.size(); ++i) frames[i].t_ms = static_cast<std::int64_t>(i);
  const auto out = mav_stream(frames);
  ASSERT_EQ(out.size(), 250u);
  EXPECT_EQ(out.front().t_ms, 40);
  EXPECT_EQ(out.back().t_ms, 10'000);
  for (std::size_t n : {0u, 1u, 39u, 41u, 79u, 80u, 12345u}) {
    EXPECT_EQ(mav_stream(std::span(frames).first(n)).size(), n / 40);
  }
}

TEST(Mav, MatchesBruteForceWindowIncludingWarmup) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0.0, 3.0);
  std::vector<ChannelFrame> frames(2000);
  std::vector<double> lane(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    for (auto &v : frames[i].channels) v = n(rng);
    lane[i] = frames[i].channels[7];
  }
  const auto out = mav_stream(frames);
  for (std::size_t j = 0; j < out.size(); ++j) {
    const auto end = static_cast<std::ptrdiff_t>(40 * (j + 1));
    EXPECT_EQ(out[j].mav[7], oracle::windowed_mav(lane, end, 300)) << "frame " << j;
  }
}

TEST(Mav, StreamingEqualsBatch) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  std::vector<ChannelFrame> frames(4321);
  for (auto &f : frames)
    for (auto &v : f.channels) v = n(rng);
  const auto batch = mav_stream(frames);
  MavWindow w;
  std::vector<FeatureFrame> live;
  for (const auto &f : frames)
    if (w.push(f)) live.push_back(w.latest());
  ASSERT_EQ(live.size(), batch.size());
  for (std::size_t i = 0; i < live.size(); ++i) EXPECT_EQ(live[i].mav, batch[i].mav);
}

TEST(Baseline, MeanOverRestFrames) {
  std::vector<FeatureFrame> f(4);
  f[0].mav.fill(0.2);
  f[1].mav.fill(9.0);
  f[2].mav.fill(0.4);
  f[3].mav.fill(7.0);
  const auto b = estimate_baseline(f, {true, false, true, false});
  for (double v : b) EXPECT_DOUBLE_EQ(v, 0.3);

  std::vector<FeatureFrame> half(3);
  for (auto &x : half) x.mav.fill(0.5);
  for (double v : estimate_baseline(half, {true, true, true})) EXPECT_EQ(v, 0.5);
}

TEST(Baseline, EmptyRestMaskThrows) {
  std::vector<FeatureFrame> f(3);
  EXPECT_THROW(estimate_baseline(f, {false, false, false}), std::invalid_argument);
  EXPECT_THROW(estimate_baseline(f, {true}), std::invalid_argument);
}

TEST(Baseline, Subtract) {
  FeatureFrame f;
  f.mav.fill(1.0);
  BaselineVector b;
  b.fill(0.3);
  for (double v : subtract_baseline(f, b).mav) EXPECT_DOUBLE_EQ(v, 0.7);
  b.fill(0.0);
  EXPECT_EQ(subtract_baseline(f, b).mav, f.mav);
  for (double v : subtract_baseline(f, BaselineVector{f.mav}).mav) EXPECT_EQ(v, 0.0);

  const std::vector<double> mav(21, 1.0), short_base(20, 0.0);
  EXPECT_THROW(subtract_baseline(mav, short_base), std::invalid_argument);
}

TEST(FilterVariantNames, RoundTrip) {
  EXPECT_EQ(parse_filter_variant("lowcost"), FilterVariant::LowCost);
  EXPECT_EQ(parse_filter_variant("research-grade"), FilterVariant::ResearchGrade);
  EXPECT_EQ(parse_filter_variant(to_string(FilterVariant::ResearchGrade)), FilterVariant::ResearchGrade);
  EXPECT_THROW(parse_filter_variant("fancy"), std::invalid_argument);
}
