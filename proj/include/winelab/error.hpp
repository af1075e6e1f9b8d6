#pragma once

#include <stdexcept>
#include <string>

namespace winelab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration, hyperparameters or usage.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Numeric failure or non-convergence surfaced as an error (strict mode).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace winelab
