#pragma once

#include <stdexcept>
#include <string>

namespace mlmc {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent sizes or component indices.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Parameter outside the domain of a model (e.g. non-positive initial volatility).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration: incompatible scheme/payoff, bad tolerance, unknown name.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mlmc
