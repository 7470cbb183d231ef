#pragma once

#include <stdexcept>
#include <string>

namespace qmix {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied value is outside the documented domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A composite dimension or grid would exceed the configured cap.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// An iterative numerical routine did not converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A model produced a non-physical state (e.g. a generalized mixture
/// evaluated outside its valid region, or broken prior moments).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// The SLD equation has no solution on the support of the reference state.
class SingularModelError : public Error {
 public:
  using Error::Error;
};

/// A zero-probability outcome carries non-zero derivative weight.
class IrregularOutcomeError : public Error {
 public:
  using Error::Error;
};

/// A linear system or projected matrix is rank deficient; for mixtures this
/// signals unidentifiability.
class RankError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The requested measurement direction carries no information.
class NoInformationError : public Error {
 public:
  using Error::Error;
};

/// Malformed input document.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace qmix
