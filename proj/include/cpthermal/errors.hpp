#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace cpthermal {

/// Input outside an operation's mathematical domain.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Raw Bessel evaluation requested where the result overflows double range.
class OverflowDomainError : public DomainError {
public:
  using DomainError::DomainError;
};

/// Quadrature, series or sum failed to reach the requested tolerance.
class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(const std::string &what, double estimate, double error)
      : std::runtime_error(format(what, estimate, error)),
        estimate_(estimate), error_(error) {}

  double estimate() const noexcept { return estimate_; }
  double error() const noexcept { return error_; }

private:
  static std::string format(const std::string &what, double estimate,
                            double error) {
    char buf[96];
    std::snprintf(buf, sizeof buf, " (estimate %.6e, error %.3e)", estimate,
                  error);
    return what + buf;
  }

  double estimate_;
  double error_;
};

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace cpthermal
