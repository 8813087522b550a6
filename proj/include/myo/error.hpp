// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace myo {

// Precondition and argument violations are reported with std::invalid_argument.
// The two classes below separate I/O trouble from numerical failure so callers
// (the CLI in particular) can map them onto distinct exit codes.

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line number of the offending row.
class FormatError : public IoError {
public:
  FormatError(std::size_t line, const std::string &what)
      : IoError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

} // namespace myo
