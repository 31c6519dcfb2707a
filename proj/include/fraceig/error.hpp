#pragma once

#include <stdexcept>
#include <string>

namespace fraceig {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or argument values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite intermediate values, degenerate trial functions, divergence.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed checkpoint, CSV or configuration file contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Geometric precondition violated (e.g. point not interior).
class GeometryError : public Error {
 public:
  using Error::Error;
};

}  // namespace fraceig
