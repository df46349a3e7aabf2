#pragma once

#include <stdexcept>
#include <string>

namespace crn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed network or rate text. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column)
      : Error(format(message, line, column)), line_(line), column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  static std::string format(const std::string& message, int line, int column) {
    if (line <= 0) return message;
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message;
  }

  int line_;
  int column_;
};

// Input violates a type invariant (nonpositive state, rate/network mismatch, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Operation called outside its domain (network not weakly reversible, system not
// complex-balanced, plan invariants broken, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Iterative method failed to converge or produced an inconsistent result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace crn
