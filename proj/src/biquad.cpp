// SPDX-License-Identifier: Apache-2.0
#include "myo/biquad.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace myo::dsp {

bool Biquad::stable() const { return std::abs(a2) < 1.0 && std::abs(a1) < 1.0 + a2; }

namespace {

struct Warp {
  double cos_w0;
  double alpha;
};

Warp warp(double freq_hz, double fs_hz, double q) {
  if (!(freq_hz > 0.0) || !(freq_hz < fs_hz / 2.0)) {
    throw std::invalid_argument("biquad frequency must lie in (0, fs/2)");
  }
  if (!(q > 0.0)) {
    throw std::invalid_argument("biquad Q must be positive");
  }
  const double w0 = 2.0 * std::numbers::pi * freq_hz / fs_hz;
  return {std::cos(w0), std::sin(w0) / (2.0 * q)};
}

Biquad normalized(double b0, double b1, double b2, double a0, double a1, double a2) {
  return {b0 / a0, b1 / a0, b2 / a0, a1 / a0, a2 / a0};
}

} // namespace

Biquad design_highpass(double cutoff_hz, double fs_hz, double q) {
  const auto [c, alpha] = warp(cutoff_hz, fs_hz, q);
  return normalized((1.0 + c) / 2.0, -(1.0 + c), (1.0 + c) / 2.0, 1.0 + alpha, -2.0 * c,
                    1.0 - alpha);
}

Biquad design_lowpass(double cutoff_hz, double fs_hz, double q) {
  const auto [c, alpha] = warp(cutoff_hz, fs_hz, q);
  return normalized((1.0 - c) / 2.0, 1.0 - c, (1.0 - c) / 2.0, 1.0 + alpha, -2.0 * c,
                    1.0 - alpha);
}

Biquad design_notch(double center_hz, double fs_hz, double q) {
  const auto [c, alpha] = warp(center_hz, fs_hz, q);
  return normalized(1.0, -2.0 * c, 1.0, 1.0 + alpha, -2.0 * c, 1.0 - alpha);
}

std::vector<double> butterworth_section_qs(int order) {
  if (order < 2 || order % 2 != 0) {
    throw std::invalid_argument("Butterworth order must be even and >= 2");
  }
  std::vector<double> qs;
  for (int k = 0; k < order / 2; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + 1.0) / (2.0 * order);
    qs.push_back(1.0 / (2.0 * std::cos(theta)));
  }
  return qs;
}

SosCascade::SosCascade(std::vector<Biquad> sections, std::size_t lanes)
    : sections_(std::move(sections)), lanes_(lanes),
      state_(2 * sections_.size() * lanes, 0.0) {}

double SosCascade::process(std::size_t lane, double x) {
  double *s = state_.data() + 2 * sections_.size() * lane;
  for (const Biquad &q : sections_) {
    const double y = q.b0 * x + s[0];
    s[0] = q.b1 * x - q.a1 * y + s[1];
    s[1] = q.b2 * x - q.a2 * y;
    x = y;
    s += 2;
  }
  return x;
}

void SosCascade::reset() { std::fill(state_.begin(), state_.end(), 0.0); }

} // namespace myo::dsp
