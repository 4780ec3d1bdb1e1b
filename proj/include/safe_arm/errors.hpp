#pragma once

#include <stdexcept>
#include <string>

namespace safe_arm {

// Raised when a caller breaks a documented precondition (shape mismatch,
// non-finite input, out-of-range argument).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or infeasible configuration (bad JSON, impossible sampling
// regions, unwritable output directory).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A loss became non-finite during training.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace safe_arm
