#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace racetrack {

/// A numeric argument outside the domain of the operation.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// A configuration that is well-formed but physically inconsistent
/// (e.g. an inner loop longer than the pump cycle).
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Bad command line or unknown preset/axis name.
class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require_probability(double value, const char* what) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw DomainError(std::string(what) + " must lie in [0, 1], got " + std::to_string(value));
    }
}

inline void require_nonnegative(double value, const char* what) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
        throw DomainError(std::string(what) + " must be nonnegative, got " + std::to_string(value));
    }
}

}  // namespace detail
}  // namespace racetrack
