#pragma once

#include <stdexcept>
#include <string>

namespace lortz {

// Bad or inconsistent input parameters. CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The perturbative regime assumed by the construction does not hold
// (no contraction, u1 not bounded below, resonance, ...). CLI exit code 3.
struct OutOfRegimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical breakdown that is not a regime question. CLI exit code 4.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace lortz
