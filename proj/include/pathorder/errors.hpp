#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pathorder {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Argument outside the domain of an operation (unknown node, non-positive shape, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A path uses a transition that is not an edge of the constraint.
class ConstraintViolation : public Error {
 public:
  using Error::Error;
};

/// Exact integer results (history counts, degrees of freedom, packed keys) do not fit 64 bits.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Invalid combination of arguments or configuration values.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// An iterative numerical method failed to converge.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Likelihood-ratio test between two orders with identical degrees of freedom.
class DegenerateTestError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pathorder
