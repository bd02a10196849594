#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pausekit {

// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input document; carries the 1-based line number of the offending row.
struct ParseError : Error {
  ParseError(std::size_t line_no, const std::string& msg)
      : Error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
  std::size_t line;
};

// Invalid argument or configuration value.
struct ArgumentError : Error {
  using Error::Error;
};

// A requested statistic is undefined for the given data (empty class,
// missing median, constant series, ...).
struct MissingStatError : Error {
  using Error::Error;
};

// Mixture fitting failed: too few points, domain violation, or no usable k.
struct FitError : Error {
  using Error::Error;
};

}  // namespace pausekit
