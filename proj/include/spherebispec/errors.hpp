#pragma once

#include <stdexcept>

namespace spherebispec {

// Raised when a computation would exceed an explicit resource or exactness
// guard (diagram oracle size limits, aliasing grids). Never a silent
// truncation; the CLI maps this to its own exit code.
struct guard_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace spherebispec
