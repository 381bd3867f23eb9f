#pragma once

#include <stdexcept>
#include <string>

namespace wgm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside a declared validity window (wavelength, branch range, ...).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Physically meaningless material data (index^2 <= 0, Sellmeier pole).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Structural problems with user input: non-orthogonal rotations,
/// mismatched grids, malformed configuration.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Unreadable inputs or unwritable outputs.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Factorization, eigensolver or quadrature failures.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace wgm
