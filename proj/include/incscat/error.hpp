#pragma once

#include <stdexcept>
#include <string>

namespace incscat {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument, shape mismatch or violated type invariant.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Receivers placed inside the computational domain and similar.
class GeometryError : public Error {
 public:
  using Error::Error;
};

// Grid the operator cannot discretize (non-square cells).
class UnsupportedGrid : public Error {
 public:
  using Error::Error;
};

// A Krylov solve failed to reach its tolerance inside an operation that
// cannot hand back a partial answer.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Malformed, truncated or corrupted file.
class FormatError : public Error {
 public:
  using Error::Error;
};

class ChecksumError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace incscat
