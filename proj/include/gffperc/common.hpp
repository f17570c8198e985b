#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gffperc {

/// Linear vertex index into a Geometry (row-major over coordinates).
using Index = std::int64_t;

/// Thrown when parameters violate a documented precondition. The CLI maps it
/// to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a numerical routine fails in a way that indicates a bug
/// upstream (e.g. a covariance that is not positive definite).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ConfigError(message);
}

}  // namespace gffperc
