#pragma once

#include <stdexcept>
#include <string>

namespace hfcov {

/// Base class for every error raised by the library. The CLI maps the
/// concrete subclasses onto its exit-code contract.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Too few observations for the requested estimator or grid.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

/// Gross-exposure bound below 1 (no fully invested portfolio exists).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// A covariance matrix is indefinite where a PSD one is required.
class IndefiniteError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

}  // namespace hfcov
