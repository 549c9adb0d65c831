#pragma once

#include <stdexcept>
#include <string>

namespace stefan {

/// Invalid user-supplied configuration. Maps to exit code 2 in the CLI.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Base class for failures of a numerical procedure. Maps to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The interface-constant residual has no sign change on the search bracket.
class NoRootBracket : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Newton iteration did not reach its tolerance.
class NewtonDiverged : public NumericalError {
 public:
  NewtonDiverged(const std::string& what, int step = -1)
      : NumericalError(what), step_(step) {}
  /// Time-step index of the failing solve, or -1 when not inside a march.
  int step() const noexcept { return step_; }

 private:
  int step_;
};

/// A tridiagonal pivot fell below the singularity threshold.
class SingularJacobian : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The time window is not an integer multiple of the curriculum increment.
class NonIntegerStages : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// A loss became NaN or infinite during training.
class NanLoss : public NumericalError {
 public:
  NanLoss(const std::string& what, long iteration)
      : NumericalError(what), iteration_(iteration) {}
  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

/// Gradient statistics unusable for a dynamic weight update.
class DegenerateStats : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Relative error requested against an identically zero reference.
class ZeroReference : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace stefan
