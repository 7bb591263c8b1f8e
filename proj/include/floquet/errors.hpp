#pragma once

#include <stdexcept>
#include <string>

namespace floquet {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation outside the domain of a formula (coincident points, z <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument combination (N = 0, mismatched grids, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A Rayleigh order sits on a Wood anomaly where 1/beta is undefined.
class AnomalyError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Vertical separation too small for a spectral (Rayleigh) series.
class SeparationError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A propagating order falls into the grazing margin of a Herglotz kernel.
class GrazingError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Inconsistent experiment or solver configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Sparse factorization broke down.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

/// Solve finished but the algebraic residual is above tolerance.
class SolverQualityError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace floquet
