#pragma once

#include <stdexcept>
#include <string>

namespace mstd {

// Invalid or contradictory run configuration (exit code 2 at the CLI).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed, degenerate or insufficient input data (exit code 3).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values produced during numeric work (exit code 4).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mstd
