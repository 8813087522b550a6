// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "myo/dsp.hpp"
#include "myo/types.hpp"

namespace myo::datastore {

// CSV schema, one header line then one row per 40-ms feature frame:
//   t_ms,raw0..raw5,mav0..mav20,kin0..kin5,label
// raw: 10-bit ADC code of the latest electrode sample (0-1023)
// mav: pre-baseline MAV, fixed 4 decimals
// kin: target kinematics in [-1, 1], fixed 4 decimals
// label: 0 = rest, 1..6 = movement (DOF index + 1)
inline constexpr std::size_t kColumns = 1 + kElectrodes + kChannels + kDofs + 1;
inline constexpr int kAdcMax = 1023;
inline constexpr int kAdcMid = 512;
inline constexpr std::int64_t kMaxTimestampMs = 9'999'999'999;
inline constexpr double kMaxMav = 9999.9999;
inline constexpr int kMaxLabel = static_cast<int>(kDofs);
inline constexpr int kRowsPerMinute = 60 * 1000 / kHopSamples;

/// 32 GB card holding 108,000 minutes.
inline constexpr double kBudgetBytesPerMinute = 32e9 / 108000.0;

struct SessionMeta {
  std::string session_id = "session";
  std::uint64_t seed = 0;
  int electrode_count = static_cast<int>(kElectrodes);
  std::array<std::string, kDofs> dof_labels;
  dsp::FilterVariant filter = dsp::FilterVariant::LowCost;

  bool operator==(const SessionMeta &) const = default;
};

struct SessionRow {
  std::int64_t t_ms = 0;
  std::array<int, kElectrodes> raw{};
  std::array<double, kChannels> mav{};
  Kinematics kin{};
  int label = 0;

  bool operator==(const SessionRow &) const = default;
};

struct SessionLog {
  SessionMeta meta;
  std::vector<SessionRow> rows;

  /// Throws std::invalid_argument if any schema invariant is broken.
  void validate() const;
  bool operator==(const SessionLog &) const = default;
};

/// Maps a synthetic sample onto the 10-bit ADC range (mid-scale 512).
int adc_code(double sample);

std::string header_line();
std::string format_row(const SessionRow &row);
/// The row as it reads back after a write (4-decimal quantization).
SessionRow quantized(const SessionRow &row);

/// CSV only; returns bytes written.
std::uint64_t write_csv(const SessionLog &log, std::ostream &os);
std::vector<SessionRow> read_csv(std::istream &is);

/// Writes <path> (CSV) and <path>.meta; returns the CSV byte count.
/// Throws IoError if the destination cannot be written.
std::uint64_t write_session(const SessionLog &log, const std::filesystem::path &path);
/// Reads <path> and, when present, <path>.meta. Throws FormatError naming
/// the line for schema violations.
SessionLog read_session(const std::filesystem::path &path);

std::filesystem::path meta_path(const std::filesystem::path &csv);
std::filesystem::path raw_path(const std::filesystem::path &csv);

/// Widest textual row the schema admits.
std::uint64_t worst_case_row_bytes();
/// Header plus worst-case rows for the given duration at 25 Hz.
std::uint64_t storage_estimate(double minutes);
/// A row with every field at its maximum textual width.
SessionRow worst_width_row(std::int64_t t_ms);

// Optional full-rate sidecar (excluded from the CSV budget):
//   "MYORAW1\n", u32 electrodes, u32 rate_hz, u64 frames,
//   then frames x electrodes little-endian float64.
void write_raw_stream(const std::filesystem::path &path, std::span<const ElectrodeFrame> frames);
std::vector<ElectrodeFrame> read_raw_stream(const std::filesystem::path &path);

} // namespace myo::datastore
