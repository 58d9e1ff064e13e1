#pragma once

#include <stdexcept>
#include <string>

namespace diffdp {

// Argument outside the support of a density or mapping.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid model or sampler configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input data (CSV rows, archives, checkpoints).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values, empty supports and similar numerical breakdowns.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A series or adaptive truncation needed more terms than its cap allows.
class TruncationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace diffdp
