#pragma once

#include <stdexcept>
#include <string>

namespace powertail {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Result not representable, or a quantity underflowed where it must not.
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

/// Inconsistent or degenerate settings.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input data unusable for the requested operation.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quadrature did not reach the requested tolerance. Carries the best
/// estimate obtained before giving up.
class AccuracyError : public std::runtime_error {
 public:
  AccuracyError(const std::string& what, double estimate)
      : std::runtime_error(what), estimate_(estimate) {}

  double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

}  // namespace powertail
