// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace myo::dsp {

/// Second-order section, normalized so that a0 == 1.
///   y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]
struct Biquad {
  double b0 = 1.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;

  /// Both poles strictly inside the unit circle (stability triangle).
  bool stable() const;
};

// Bilinear-transform designs with frequency prewarping (RBJ cookbook forms).
// q = 1/sqrt(2) gives a Butterworth second-order section.
Biquad design_highpass(double cutoff_hz, double fs_hz, double q);
Biquad design_lowpass(double cutoff_hz, double fs_hz, double q);
Biquad design_notch(double center_hz, double fs_hz, double q);

/// Q values of the second-order sections of an even-order Butterworth filter.
std::vector<double> butterworth_section_qs(int order);

/// Cascade of biquads run independently over several lanes (channels).
/// Transposed direct form II, one pair of state words per (lane, section).
class SosCascade {
public:
  SosCascade() = default;
  SosCascade(std::vector<Biquad> sections, std::size_t lanes);

  double process(std::size_t lane, double x);
  void reset();

  const std::vector<Biquad> &sections() const { return sections_; }
  std::size_t lanes() const { return lanes_; }

private:
  std::vector<Biquad> sections_;
  std::size_t lanes_ = 0;
  std::vector<double> state_;
};

} // namespace myo::dsp
