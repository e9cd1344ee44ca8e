#pragma once

#include <stdexcept>
#include <string>

namespace flock {

// Raised when an iterative numeric routine fails to converge or a state
// turns non-finite. The message carries iteration/step diagnostics.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a quantity is requested outside the regime where it is
// defined (e.g. the alpha = 1 dispersion ceiling with too-fast flocks).
struct hypothesis_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised on malformed configuration documents.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace flock
