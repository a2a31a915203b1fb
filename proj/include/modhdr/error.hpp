#pragma once

#include <stdexcept>
#include <string>

namespace modhdr {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition or configuration violations (bad shapes, flags, ranges).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// File and stream failures.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Numerical failures (e.g. training divergence).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace modhdr
