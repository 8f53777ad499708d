#pragma once

#include <stdexcept>
#include <string>

namespace fusion {

/// Invalid parameters, malformed input or a request outside a guarded range.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A computation produced a non-finite value or an impossible observation.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fusion
