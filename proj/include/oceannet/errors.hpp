#pragma once

#include <stdexcept>
#include <string>

namespace oceannet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes or grids disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Operation applied to the wrong dtype (e.g. GELU on complex data).
class TypeError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration: bad mode window, empty mask, non power-of-two grid,
/// malformed config file, missing input file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// API misuse such as differentiating a non-scalar.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A NaN or Inf appeared where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written, or its contents are corrupt.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A metric is undefined for its inputs (zero variance, empty contour).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace oceannet
