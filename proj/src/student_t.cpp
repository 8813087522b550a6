// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "myo/error.hpp"
#include "myo/evalkit.hpp"

namespace myo::evalkit {

namespace {

// Continued fraction for I_x(a, b), valid for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) {
      return h;
    }
  }
  throw NumericError("incomplete beta continued fraction did not converge");
}

} // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("incomplete beta needs a, b > 0");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument("incomplete beta needs x in [0, 1]");
  }
  if (x == 0.0 || x == 1.0) {
    return x;
  }
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) {
    throw std::invalid_argument("degrees of freedom must be positive");
  }
  if (std::isnan(t)) {
    return t;
  }
  if (std::isinf(t)) {
    return t > 0 ? 1.0 : 0.0;
  }
  const double t2 = t * t;
  if (t2 < df) {
    // Near the centre: F = 1/2 + sign(t)/2 * I_{t^2/(df+t^2)}(1/2, df/2).
    const double half = 0.5 * incomplete_beta(0.5, 0.5 * df, t2 / (df + t2));
    return t >= 0 ? 0.5 + half : 0.5 - half;
  }
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t2));
  return t >= 0 ? 1.0 - tail : tail;
}

double student_t_pdf(double t, double df) {
  if (!(df > 0.0)) {
    throw std::invalid_argument("degrees of freedom must be positive");
  }
  const double log_norm = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                          0.5 * std::log(df * std::numbers::pi);
  return std::exp(log_norm - 0.5 * (df + 1.0) * std::log1p(t * t / df));
}

double student_t_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("quantile probability must lie in (0, 1)");
  }
  if (!(df > 0.0)) {
    throw std::invalid_argument("degrees of freedom must be positive");
  }
  if (p == 0.5) {
    return 0.0;
  }
  if (p < 0.5) {
    return -student_t_quantile(1.0 - p, df);
  }

  double lo = 0.0;
  double hi = 1.0;
  while (student_t_cdf(hi, df) < p) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) {
      throw NumericError("t quantile bracket overflow");
    }
  }
  // Newton steps, falling back to bisection whenever they leave the bracket.
  double t = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = student_t_cdf(t, df) - p;
    if (f == 0.0) {
      return t;
    }
    if (f < 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    const double slope = student_t_pdf(t, df);
    double next = slope > 0.0 ? t - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
    }
    if (std::abs(next - t) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(t)) {
      return next;
    }
    t = next;
  }
  return t;
}

} // namespace myo::evalkit
