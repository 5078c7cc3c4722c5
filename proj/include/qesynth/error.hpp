#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qe {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input data. Carries a 1-based line number when one is known
/// (0 means "no line information").
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Transport-level failure talking to a remote infill service.
class NetworkError : public Error {
 public:
  using Error::Error;
};

/// The remote service answered, but the payload violates the infill
/// contract (residual mask, token count mismatch, bad JSON).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace qe
