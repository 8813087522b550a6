// SPDX-License-Identifier: Apache-2.0
#include "myo/datastore.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "myo/error.hpp"
#include "myo/synthemg.hpp"

namespace myo::datastore {

namespace {

void append_fixed4(std::string &out, double v) {
  char buf[48];
  int n = std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string_view s(buf, static_cast<std::size_t>(n));
  if (s == "-0.0000") {
    s = "0.0000";
  }
  out.append(s);
}

template <typename T> bool parse_int(std::string_view s, T &out) {
  const auto *end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

bool parse_real(std::string_view s, double &out) {
  const auto *end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out, std::chars_format::fixed);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

void check_row(const SessionRow &r, const SessionRow *prev, std::size_t line) {
  auto fail = [line](const std::string &what) {
    if (line == 0) {
      throw std::invalid_argument(what);
    }
    throw FormatError(line, what);
  };
  if (r.t_ms < 0 || r.t_ms > kMaxTimestampMs) {
    fail("timestamp out of range");
  }
  if (prev) {
    if (r.t_ms <= prev->t_ms) {
      fail("non-monotone timestamp " + std::to_string(r.t_ms) + " after " +
           std::to_string(prev->t_ms));
    }
    if (r.t_ms != prev->t_ms + kHopSamples) {
      fail("timestamp step is not 40 ms");
    }
  }
  for (int v : r.raw) {
    if (v < 0 || v > kAdcMax) {
      fail("raw value " + std::to_string(v) + " outside 0-1023");
    }
  }
  for (double v : r.mav) {
    if (!std::isfinite(v) || v < 0.0 || v > kMaxMav) {
      fail("MAV value outside [0, 9999.9999]");
    }
  }
  for (double v : r.kin) {
    if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
      fail("kinematic value outside [-1, 1]");
    }
  }
  if (r.label < 0 || r.label > kMaxLabel) {
    fail("label outside 0-6");
  }
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  return out;
}

SessionRow parse_row(std::string_view line, std::size_t line_no) {
  const auto f = split_commas(line);
  if (f.size() != kColumns) {
    throw FormatError(line_no, "expected " + std::to_string(kColumns) + " columns, got " +
                                   std::to_string(f.size()));
  }
  SessionRow r;
  std::size_t i = 0;
  auto bad = [&](const char *what) {
    throw FormatError(line_no, std::string("cannot parse ") + what + " in column " +
                                   std::to_string(i + 1));
  };
  if (!parse_int(f[i], r.t_ms)) bad("t_ms");
  ++i;
  for (auto &v : r.raw) {
    if (!parse_int(f[i], v)) bad("raw value");
    ++i;
  }
  for (auto &v : r.mav) {
    if (!parse_real(f[i], v)) bad("MAV value");
    ++i;
  }
  for (auto &v : r.kin) {
    if (!parse_real(f[i], v)) bad("kinematic value");
    ++i;
  }
  if (!parse_int(f[i], r.label)) bad("label");
  return r;
}

void write_meta(const SessionMeta &m, std::ostream &os) {
  os << "session_id=" << m.session_id << '\n'
     << "seed=" << m.seed << '\n'
     << "electrode_count=" << m.electrode_count << '\n'
     << "dof_labels=";
  for (std::size_t d = 0; d < kDofs; ++d) {
    os << (d ? "," : "") << m.dof_labels[d];
  }
  os << '\n' << "filter=" << dsp::to_string(m.filter) << '\n';
}

SessionMeta read_meta(std::istream &is) {
  SessionMeta m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(line_no, "metadata line lacks '='");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    try {
      if (key == "session_id") {
        m.session_id = value;
      } else if (key == "seed") {
        if (!parse_int(std::string_view(value), m.seed)) throw std::invalid_argument("bad seed");
      } else if (key == "electrode_count") {
        if (!parse_int(std::string_view(value), m.electrode_count) ||
            m.electrode_count != static_cast<int>(kElectrodes))
          throw std::invalid_argument("electrode_count must be 6");
      } else if (key == "dof_labels") {
        const auto parts = split_commas(value);
        if (parts.size() != kDofs) throw std::invalid_argument("dof_labels needs six entries");
        for (std::size_t d = 0; d < kDofs; ++d) m.dof_labels[d] = std::string(parts[d]);
      } else if (key == "filter") {
        m.filter = dsp::parse_filter_variant(value);
      } else {
        throw std::invalid_argument("unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument &e) {
      throw FormatError(line_no, e.what());
    }
  }
  return m;
}

} // namespace

int adc_code(double sample) {
  const double code = std::round(sample) + kAdcMid;
  return static_cast<int>(std::clamp(code, 0.0, static_cast<double>(kAdcMax)));
}

std::string header_line() {
  std::string h = "t_ms";
  for (std::size_t e = 0; e < kElectrodes; ++e) h += ",raw" + std::to_string(e);
  for (std::size_t c = 0; c < kChannels; ++c) h += ",mav" + std::to_string(c);
  for (std::size_t d = 0; d < kDofs; ++d) h += ",kin" + std::to_string(d);
  h += ",label\n";
  return h;
}

std::string format_row(const SessionRow &row) {
  std::string s;
  s.reserve(320);
  s += std::to_string(row.t_ms);
  for (int v : row.raw) {
    s += ',';
    s += std::to_string(v);
  }
  for (double v : row.mav) {
    s += ',';
    append_fixed4(s, v);
  }
  for (double v : row.kin) {
    s += ',';
    append_fixed4(s, v);
  }
  s += ',';
  s += std::to_string(row.label);
  s += '\n';
  return s;
}

SessionRow quantized(const SessionRow &row) {
  std::string line = format_row(row);
  line.pop_back();
  return parse_row(line, 0);
}

void SessionLog::validate() const {
  if (meta.electrode_count != static_cast<int>(kElectrodes)) {
    throw std::invalid_argument("session must have six electrodes");
  }
  const SessionRow *prev = nullptr;
  for (const auto &r : rows) {
    check_row(r, prev, 0);
    prev = &r;
  }
}

std::uint64_t write_csv(const SessionLog &log, std::ostream &os) {
  log.validate();
  std::uint64_t bytes = 0;
  const std::string header = header_line();
  os << header;
  bytes += header.size();
  for (const auto &r : log.rows) {
    const std::string line = format_row(r);
    os << line;
    bytes += line.size();
  }
  if (!os) {
    throw IoError("failed while writing session CSV");
  }
  return bytes;
}

std::vector<SessionRow> read_csv(std::istream &is) {
  std::string line;
  if (!std::getline(is, line)) {
    throw FormatError(1, "missing header line");
  }
  if (line + '\n' != header_line()) {
    throw FormatError(1, "header does not match the session schema");
  }
  std::vector<SessionRow> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    SessionRow r = parse_row(line, line_no);
    check_row(r, rows.empty() ? nullptr : &rows.back(), line_no);
    rows.push_back(r);
  }
  return rows;
}

std::filesystem::path meta_path(const std::filesystem::path &csv) {
  return std::filesystem::path(csv.string() + ".meta");
}

std::filesystem::path raw_path(const std::filesystem::path &csv) {
  return std::filesystem::path(csv.string() + ".raw");
}

std::uint64_t write_session(const SessionLog &log, const std::filesystem::path &path) {
  log.validate();
  std::ofstream csv(path, std::ios::binary | std::ios::trunc);
  if (!csv) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  const std::uint64_t bytes = write_csv(log, csv);
  csv.close();
  if (!csv) {
    throw IoError("failed to finish writing '" + path.string() + "'");
  }
  std::ofstream meta(meta_path(path), std::ios::binary | std::ios::trunc);
  if (!meta) {
    throw IoError("cannot open '" + meta_path(path).string() + "' for writing");
  }
  write_meta(log.meta, meta);
  return bytes;
}

SessionLog read_session(const std::filesystem::path &path) {
  std::ifstream csv(path, std::ios::binary);
  if (!csv) {
    throw IoError("cannot open '" + path.string() + "'");
  }
  SessionLog log;
  std::copy(synth::kDofLabels.begin(), synth::kDofLabels.end(), log.meta.dof_labels.begin());
  log.rows = read_csv(csv);
  if (std::ifstream meta(meta_path(path), std::ios::binary); meta) {
    log.meta = read_meta(meta);
  }
  return log;
}

SessionRow worst_width_row(std::int64_t t_ms) {
  SessionRow r;
  r.t_ms = t_ms;
  r.raw.fill(kAdcMax);
  r.mav.fill(kMaxMav);
  r.kin.fill(-1.0);
  r.label = kMaxLabel;
  return r;
}

std::uint64_t worst_case_row_bytes() { return format_row(worst_width_row(kMaxTimestampMs)).size(); }

std::uint64_t storage_estimate(double minutes) {
  if (!(minutes >= 0.0)) {
    throw std::invalid_argument("minutes must be non-negative");
  }
  const auto rows = static_cast<std::uint64_t>(std::llround(minutes * kRowsPerMinute));
  return header_line().size() + rows * worst_case_row_bytes();
}

namespace {

constexpr char kRawMagic[8] = {'M', 'Y', 'O', 'R', 'A', 'W', '1', '\n'};

template <typename T> void put_le(std::ostream &os, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(b, b + sizeof(T));
  }
  os.write(reinterpret_cast<const char *>(b), sizeof(T));
}

template <typename T> T get_le(std::istream &is) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char *>(b), sizeof(T))) {
    throw IoError("truncated raw stream");
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(b, b + sizeof(T));
  }
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

} // namespace

void write_raw_stream(const std::filesystem::path &path, std::span<const ElectrodeFrame> frames) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  os.write(kRawMagic, sizeof kRawMagic);
  put_le<std::uint32_t>(os, kElectrodes);
  put_le<std::uint32_t>(os, kSampleRateHz);
  put_le<std::uint64_t>(os, frames.size());
  for (const auto &f : frames) {
    for (double v : f.samples) {
      put_le(os, v);
    }
  }
  if (!os) {
    throw IoError("failed while writing '" + path.string() + "'");
  }
}

std::vector<ElectrodeFrame> read_raw_stream(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw IoError("cannot open '" + path.string() + "'");
  }
  char magic[sizeof kRawMagic];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kRawMagic, sizeof magic) != 0) {
    throw IoError("'" + path.string() + "' is not a raw electrode stream");
  }
  if (get_le<std::uint32_t>(is) != kElectrodes || get_le<std::uint32_t>(is) != kSampleRateHz) {
    throw IoError("raw stream has an unsupported layout");
  }
  const auto n = get_le<std::uint64_t>(is);
  std::vector<ElectrodeFrame> frames(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    frames[i].t_ms = static_cast<std::int64_t>(i);
    for (auto &v : frames[i].samples) {
      v = get_le<double>(is);
    }
  }
  return frames;
}

} // namespace myo::datastore
