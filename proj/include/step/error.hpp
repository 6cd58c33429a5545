#pragma once

#include <stdexcept>
#include <string>

namespace step {

// Dimension or precondition violation on in-memory values.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem-level failure (open/read/write).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace step
