#pragma once

#include <stdexcept>
#include <string>

namespace switchlab {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Vectors or matrices whose sizes disagree.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation (negative rate, load >= 1, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Problem size above a configured enumeration cap.
class CapacityError : public Error {
public:
  using Error::Error;
};

/// Arrival rates that do not satisfy R lambda < C.
class InstabilityError : public Error {
public:
  using Error::Error;
};

/// Time or slot requested before the current clock.
class OrderingError : public Error {
public:
  using Error::Error;
};

/// A precondition of a decomposition kernel was not met by its input.
class ContractViolation : public Error {
public:
  using Error::Error;
};

/// Caratheodory elimination hit a numerically singular step.
class ReductionFailure : public Error {
public:
  using Error::Error;
};

/// A pathwise invariant of the coupled simulation was broken.
class InvariantViolation : public Error {
public:
  using Error::Error;
};

/// Malformed experiment configuration; the message names the offending field.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Not enough samples to fit a tail slope.
class InsufficientData : public Error {
public:
  using Error::Error;
};

/// Internal consistency failure (e.g. zero SFA rate on a busy route).
class ConsistencyError : public Error {
public:
  using Error::Error;
};

}  // namespace switchlab
