#pragma once

#include <stdexcept>
#include <string>

namespace pinn {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// API misuse: mixed-graph variables, unbound inputs, shape mismatches.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A value-level precondition was violated (bad counts, empty sets, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A computation broke down numerically (non-convergence, overflow, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A file could not be parsed; carries the 1-based offending line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

}  // namespace pinn
