#pragma once

#include <stdexcept>
#include <string>

namespace hybrid {

// Base for every error raised by the library. The CLI maps subclasses to
// exit codes: validation-type errors -> 1, capacity/audit errors -> 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// Raised when an operation's precondition does not hold for the given input
// (e.g. a hard instance cannot be built on a too-small graph).
class PreconditionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class RoundCapExceeded : public Error {
 public:
  using Error::Error;
};

// Tokens missing at targets after a routing run.
class DeliveryError : public Error {
 public:
  using Error::Error;
};

}  // namespace hybrid
