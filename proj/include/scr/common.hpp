#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace scr {

/// Caller broke a precondition (empty index set, non-finite input, ...).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed external data. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg, int64_t line = -1)
      : std::runtime_error(line >= 0 ? "line " + std::to_string(line) + ": " + msg : msg),
        line_(line) {}
  int64_t line() const { return line_; }

 private:
  int64_t line_;
};

/// File I/O failure or corrupted on-disk payload.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative solver exhausted its iteration budget.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace scr
