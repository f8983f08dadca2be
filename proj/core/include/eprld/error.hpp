#pragma once

#include <stdexcept>
#include <string>

namespace eprld {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-square or mismatched matrix/vector shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// NaN or infinite entries in user supplied data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// An argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed (non-convergence, broken invariant).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Every eigenvalue of A is real: the process is reversible and the
/// entropy production rate vanishes identically.
class ReversibilityError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unknown configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace eprld
