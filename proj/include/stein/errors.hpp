#pragma once

#include <stdexcept>
#include <string>

namespace stein {

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NonFiniteInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidParameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InsufficientSamples : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SizeExceeded : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct CholeskyFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CgBreakdown : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a stepper produces a non-finite coordinate; carries enough
// context to locate the blow-up in a run.
struct NonFiniteUpdate : std::runtime_error {
  NonFiniteUpdate(const std::string& what, long iteration_, long particle_)
      : std::runtime_error(what), iteration(iteration_), particle(particle_) {}
  long iteration = -1;
  long particle = -1;
};

struct ConfigError : std::runtime_error {
  ConfigError(const std::string& field_, const std::string& what)
      : std::runtime_error("config field '" + field_ + "': " + what), field(field_) {}
  std::string field;
};

}  // namespace stein
