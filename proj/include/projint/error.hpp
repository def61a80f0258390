#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace projint {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (e.g. mismatched state dimensions).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Invalid system, tableau, scheme or experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A non-positive value was handed to a log-log fit.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, std::size_t index) : Error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Base for failures caused by the numbers themselves (overflow, NaN).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A Runge-Kutta stage produced a non-finite field value. Stage indices are 1-based.
class IntegrationFailure : public NumericalError {
 public:
  IntegrationFailure(const std::string& what, int stage) : NumericalError(what), stage_(stage) {}
  int stage() const noexcept { return stage_; }

 private:
  int stage_;
};

/// The microsolver produced a non-finite state; `step()` is the 1-based microstep.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, long step) : NumericalError(what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// A projective-integration macrostep failed. `increment()` is 1-based
/// (P+1 names the final PI2 relaxation); `macro_step()` is -1 until run() tags it.
class StepFailure : public NumericalError {
 public:
  StepFailure(const std::string& what, int increment, long macro_step = -1)
      : NumericalError(what), increment_(increment), macro_step_(macro_step) {}
  int increment() const noexcept { return increment_; }
  long macro_step() const noexcept { return macro_step_; }

 private:
  int increment_;
  long macro_step_;
};

/// A reference oracle was asked for more work than it is allowed to do,
/// or failed its own step-halving self check.
class InfeasibleOracle : public Error {
 public:
  using Error::Error;
};

}  // namespace projint
