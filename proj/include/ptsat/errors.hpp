#pragma once

#include <stdexcept>
#include <string>

namespace ptsat {

// Base for everything the library throws. Callers that only care about
// "the numerics failed" can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument sits on a pole (e.g. log-gamma at a non-positive integer).
class PoleError : public Error {
 public:
  using Error::Error;
};

// No evaluation regime reaches the requested accuracy, or an iteration
// ran out of budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// A result would be NaN or infinite.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Matching system at a joint is singular at the supplied energy.
class DegenerateMatchError : public Error {
 public:
  using Error::Error;
};

// Too few usable samples for a statistic.
class SupportError : public Error {
 public:
  using Error::Error;
};

// Shooting integration could not be carried out as configured.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

// Invalid user-facing parameters (model, rectangle, grid, config file).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ptsat
