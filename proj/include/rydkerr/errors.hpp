#pragma once

#include <stdexcept>
#include <string>

namespace rydkerr {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Missing, malformed or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of a physical formula.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Non-finite results (overflow, NaN propagation).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Fringe analysis failures: carrier detection, grid mismatch, empty masks.
class SignalProcessingError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

}  // namespace rydkerr
