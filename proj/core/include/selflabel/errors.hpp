// Copyright 2026 The selflabel Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace selflabel {

// Invalid configuration values. CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Precondition violations on operation arguments (shape, range, K > N ...).
// CLI exit code 2.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Anything wrong with data read from disk. CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedHeaderError : public DataError {
 public:
  using DataError::DataError;
};

class TruncatedPayloadError : public DataError {
 public:
  using DataError::DataError;
};

// Files of one corpus or artifact set disagree with each other.
class ConsistencyError : public DataError {
 public:
  using DataError::DataError;
};

// Unknown sample / embedding id.
class LookupError : public DataError {
 public:
  using DataError::DataError;
};

// Non-finite values, zero norms, degenerate statistics. CLI exit code 4.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateCohortError : public NumericError {
 public:
  using NumericError::NumericError;
};

// A training run produced a non-finite loss.
class TrainingError : public NumericError {
 public:
  TrainingError(const std::string& what, std::size_t epoch)
      : NumericError(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace selflabel
