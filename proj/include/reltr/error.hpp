#pragma once

#include <stdexcept>
#include <string>

namespace reltr {

// Dimension/shape mismatches between tensors or layers.
struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Inconsistent or unusable configuration (widths, head counts, fractions).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Rejected input data (dataset files, samples, checkpoints).
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace reltr
