// SPDX-License-Identifier: MIT
#pragma once

#include <stdexcept>
#include <string>

namespace pcnn {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: bad distribution parameters, inconsistent shapes,
/// out-of-range counts. The message names the offending field.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The moment matrix for some polynomial degree is singular or too
/// ill-conditioned to solve reliably.
class ConditioningError : public Error {
 public:
  ConditioningError(const std::string& msg, int degree)
      : Error(msg), degree_(degree) {}
  int degree() const { return degree_; }

 private:
  int degree_;
};

/// Requested basis size exceeds what fits in a size_t.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Least-squares design matrix is rank deficient and no ridge was requested.
class RankError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value encountered where a finite one is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// API misuse: missing forward cache, evaluator not provided, etc.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Configuration file violates the schema. Carries one line per violation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pcnn
