#pragma once

#include <stdexcept>
#include <string>

namespace fkpp {

// Raised when a transition kernel carries too much mass past the edge of the
// computational grid for the extension constants to stand in for it.
class GridTooSmallError : public std::runtime_error {
 public:
  explicit GridTooSmallError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid user input in a key=value config or a compact list syntax.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace fkpp
