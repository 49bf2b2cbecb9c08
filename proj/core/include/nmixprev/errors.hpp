#pragma once

#include <stdexcept>
#include <string>

namespace nmixprev {

// Error classes map onto the CLI exit-code classes:
//   usage 2, data 3, convergence 4, degenerate model 5.

// A value outside an operation's documented domain (e.g. pmf outside support).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Not enough data to perform the operation (fewer than two positive log-log
// bins, empty histogram for estimation).
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An observed report count exceeds the model's support bound n_max.
class InfeasibleSupportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// f(0) is numerically 1: the model says nobody reports, so the truncated
// distribution and the offender estimator are undefined.
class DegenerateModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File could not be opened or written.
class FileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

}  // namespace nmixprev
