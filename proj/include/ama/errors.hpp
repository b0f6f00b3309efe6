#pragma once

#include <stdexcept>
#include <string>

namespace ama {

// Contract violation: bad shapes, invalid hyperparameters, missing tensors.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Corrupt or malformed data: files, payloads, non-finite numerics.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ama
