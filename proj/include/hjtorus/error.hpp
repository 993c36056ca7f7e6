#pragma once

#include <stdexcept>
#include <string>

namespace hjt {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument or out-of-range parameter.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Query outside the domain of a function (e.g. Legendre transform at +inf).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A structural invariant that the theory guarantees was observed broken.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

// Optimal control found on the boundary of the search box.
class ControlBoxError : public InvariantViolation {
 public:
  using InvariantViolation::InvariantViolation;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace hjt
