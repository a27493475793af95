#pragma once

#include <stdexcept>
#include <string>

namespace lyap {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Interval domain violation: division by an interval containing zero,
/// invalid bounds, sqrt of a negative interval, overflow.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Shape mismatch, unknown names, bad configuration.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Floating-point preconditions not met (near-defective, singular,
/// numerically non-hyperbolic).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  enum class Kind { StepFailure, Divergence };

  IntegrationError(Kind kind, double time, const std::string& what)
      : Error(what), kind_(kind), time_(time) {}

  Kind kind() const noexcept { return kind_; }
  double time() const noexcept { return time_; }

 private:
  Kind kind_;
  double time_;
};

class PoincareError : public Error {
 public:
  enum class Kind { NoReturn, TangentialCrossing };

  PoincareError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace lyap
