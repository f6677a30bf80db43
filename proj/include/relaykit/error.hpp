#pragma once

#include <stdexcept>
#include <string>

namespace relaykit {

/// Invalid configuration or argument. CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed or insufficient input data. CLI exit code 3.
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Model failure: numerical breakdown, incompatible or corrupt model. CLI exit code 4.
class ModelError : public std::runtime_error {
public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace relaykit
