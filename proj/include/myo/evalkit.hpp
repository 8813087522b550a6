// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "myo/decoder.hpp"
#include "myo/types.hpp"

namespace myo::evalkit {

// ---------------------------------------------------------------------------
// Student-t distribution

/// Regularized incomplete beta I_x(a, b) (continued fraction, modified Lentz).
double incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double df);
double student_t_pdf(double t, double df);
/// Inverse CDF; p in (0, 1).
double student_t_quantile(double p, double df);

// ---------------------------------------------------------------------------
// Signal-to-noise ratio

enum class MovementClass { Digits, Grasp, Wrist };
std::string_view to_string(MovementClass c);
MovementClass parse_movement_class(std::string_view s);

struct SnrReport {
  MovementClass movement_class = MovementClass::Digits;
  std::vector<double> values; // per electrode
  double mean = 0.0;
  double sd = 0.0; // sample standard deviation across electrodes
};

inline constexpr double kRestEpsilon = 1e-12;

/// Movement MAV over rest MAV per electrode. Throws std::invalid_argument if
/// any rest MAV is <= 1e-12.
SnrReport snr(std::span<const double> movement_mav, std::span<const double> rest_mav,
              MovementClass movement_class = MovementClass::Digits);

// ---------------------------------------------------------------------------
// RMSE of intended and unintended movements

using Trace = std::vector<std::vector<double>>;    // frames x DOFs
using CellMask = std::vector<std::vector<bool>>;  // frames x DOFs

struct RmseEntry {
  std::optional<double> intended;   // absent when no intended cells
  std::optional<double> unintended; // absent when no unintended cells
  std::size_t intended_cells = 0;
  std::size_t unintended_cells = 0;
};

/// A (frame, DOF) cell is intended when its target is nonzero.
CellMask intended_mask(const Trace &actual);

RmseEntry rmse(const Trace &predicted, const Trace &actual, const CellMask &intended);

// ---------------------------------------------------------------------------
// 50/50 frame split

struct Split {
  std::vector<std::size_t> train; // ascending
  std::vector<std::size_t> test;  // ascending
};

/// Seeded random per-frame partition; the train half gets the extra frame of
/// an odd count.
Split split_50_50(std::size_t frames, std::uint64_t seed);

// ---------------------------------------------------------------------------
// DOF-combination sweep

/// Frames at 25 Hz: raw (pre-baseline) MAV, six-DOF targets and segment labels
/// (0 = rest).
struct DecodingSession {
  std::vector<FeatureFrame> features;
  std::vector<Kinematics> kinematics;
  std::vector<int> labels;

  std::size_t frames() const { return features.size(); }
  void validate() const;
};

struct SweepOptions {
  decoder::TrainOptions train;
  /// Run subsets on worker threads.
  bool parallel = true;
};

struct SubsetResult {
  std::vector<std::size_t> dofs;
  RmseEntry rmse;
};

struct SweepRow {
  int k = 0;
  std::size_t subsets = 0;
  std::optional<double> rmse_intended;   // mean over subsets
  std::optional<double> rmse_unintended; // mean over subsets
  std::vector<SubsetResult> detail;
};

/// All k-element subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k);

/// Train on the split's train half and decode its test half, for one DOF
/// subset. Frames in which a DOF outside the subset moves are left out of
/// both halves; the baseline comes from rest frames of the train half.
RmseEntry evaluate_subset(const DecodingSession &session, const Split &split,
                          std::span<const std::size_t> dofs,
                          const decoder::TrainOptions &options = {});

/// Average intended/unintended RMSE over all C(6, k) DOF subsets.
/// Throws std::invalid_argument for k outside 1..6.
SweepRow dof_sweep(const DecodingSession &session, int k, std::uint64_t seed,
                   const SweepOptions &options = {});

// ---------------------------------------------------------------------------
// Equivalence testing

struct OneSidedTest {
  double t = 0.0;
  double p = 0.0;
};

/// H0: mean >= margin against H1: mean < margin.
OneSidedTest one_sided_upper(std::span<const double> diffs, double margin);
/// H0: mean <= margin against H1: mean > margin.
OneSidedTest one_sided_lower(std::span<const double> diffs, double margin);

struct TostResult {
  std::size_t n = 0;
  double df = 0.0;
  double mean_diff = 0.0;
  double sd_diff = 0.0;
  double t_critical = 0.0; // t_{1-alpha, n-1}
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  double alpha = 0.05;
};

/// Tightest equivalence margins for paired differences (system A - system B):
/// each bound is where its one-sided test reaches p = alpha.
TostResult tost_min_bounds(std::span<const double> paired_diffs, double alpha = 0.05);

/// 100 * bound / reference_mean.
double percent_equivalence(double bound, double reference_mean);

// ---------------------------------------------------------------------------
// Reports

void write_snr(std::ostream &os, const SnrReport &r);
void write_rmse(std::ostream &os, const RmseEntry &r);
void write_tost(std::ostream &os, const TostResult &r);
/// CSV: k,subsets,rmse_intended,rmse_unintended
void write_sweep_csv(std::ostream &os, std::span<const SweepRow> rows);

} // namespace myo::evalkit
