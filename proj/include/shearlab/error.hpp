#pragma once

#include <stdexcept>
#include <string>

namespace shearlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument violates an operation's precondition.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A scenario document is malformed or references unknown entities.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The input is well formed but falls outside what the method supports
/// (for example a shear profile with degenerate critical points).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values appeared during a computation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace shearlab
