#pragma once

#include <stdexcept>
#include <string>

namespace zico {

// Invalid argument, shape mismatch, or out-of-range configuration value.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data violates the model's assumptions (negative or fractional counts).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// sI - W o W left the M-matrix domain of the log-det acyclicity function.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// NaN/Inf objective or too many consecutive rejected steps.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace zico
