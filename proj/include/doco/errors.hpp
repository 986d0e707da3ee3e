#pragma once

#include <stdexcept>
#include <string>

namespace doco {

// Invalid user input: bad configuration values, malformed files, violated
// preconditions on public entry points.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical routine failed to reach its tolerance.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace doco
