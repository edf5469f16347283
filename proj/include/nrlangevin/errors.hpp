#pragma once

#include <stdexcept>
#include <string>

namespace nrlangevin {

// Raised when a computation fails numerically (unstable scheme, inadmissible
// step size, singular matrix equation, ...).  The CLI maps this to exit code 4.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// A deterministic flow step produced a non-finite state.
struct FlowBlowupError : NumericalError {
  explicit FlowBlowupError(const std::string& what) : NumericalError(what) {}
};

// Invalid experiment configuration (exit code 2).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or missing data file (exit code 3).
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nrlangevin
