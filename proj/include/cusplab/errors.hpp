#pragma once

#include <stdexcept>
#include <string>

namespace cusplab {

/// Invalid parameters or configuration (maps to CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of a total-on-its-domain function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Bracketed root search ran out of iterations.
class RootError : public std::runtime_error {
 public:
  RootError(const std::string& what, double lo, double hi)
      : std::runtime_error(what), lo(lo), hi(hi) {}
  double lo;
  double hi;
};

/// ODE integration failed (step size underflow, iteration cap).
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double at)
      : std::runtime_error(what), at(at) {}
  double at;
};

/// A table failed residual certification.
class CertificationError : public std::runtime_error {
 public:
  CertificationError(const std::string& what, double worst_y, double worst_value)
      : std::runtime_error(what), worst_y(worst_y), worst_value(worst_value) {}
  double worst_y;
  double worst_value;
};

/// Fit refused (too few samples, non-monotone history, starved window).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cusplab
