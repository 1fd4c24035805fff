#pragma once

#include <stdexcept>
#include <string>

namespace imub {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates a type invariant (negative mass, malformed point, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Q_x is requested with a starting point on E, where it is an atom.
class DegenerateStart : public Error {
 public:
  using Error::Error;
};

class InvalidExponent : public Error {
 public:
  using Error::Error;
};

/// nu has a non-integrable density at axis1 magnitude 1.
class SingularPoint : public Error {
 public:
  using Error::Error;
};

class NonIntegrable : public Error {
 public:
  using Error::Error;
};

class QuadratureFailure : public Error {
 public:
  using Error::Error;
};

class StepBudgetExceeded : public Error {
 public:
  using Error::Error;
};

class ScheduleError : public Error {
 public:
  using Error::Error;
};

class NumericalBlowup : public Error {
 public:
  using Error::Error;
};

class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

}  // namespace imub
