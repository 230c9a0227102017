#pragma once

#include <stdexcept>
#include <string>

namespace metricforge {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed files, out-of-range arguments, incomplete
// distance specifications, invalid eps, duplicate points. CLI exit code 2.
struct InputError : Error {
  using Error::Error;
};

// Vector/matrix shape disagreements.
struct DimensionError : InputError {
  using InputError::InputError;
};

// Rank deficiency: the supplied or sampled vectors are not numerically
// linearly independent (includes retry exhaustion when resampling).
// Treated as a numerical failure by the CLI (exit code 3).
struct RankError : Error {
  using Error::Error;
};

// Overflow/underflow or verification breakdown. `stage` names the pipeline
// step that detected the problem so reports can point at it.
struct NumericalError : Error {
  NumericalError(std::string stage_, const std::string& what)
      : Error(stage_ + ": " + what), stage(std::move(stage_)) {}
  std::string stage;
};

}  // namespace metricforge
