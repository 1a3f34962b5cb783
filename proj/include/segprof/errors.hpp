#pragma once

#include <stdexcept>
#include <string>

namespace segprof {

// Error categories map onto CLI exit codes:
//   ConfigError -> 2, InputError -> 3, ComputationError -> 4.

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A schema is inconsistent, or a table does not match it.
class SchemaError : public InputError {
 public:
  using InputError::InputError;
};

class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numeric value falls outside every declared category interval.
class RangeError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

class ImputationError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

class EncodingError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

class ProfilingError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

}  // namespace segprof
