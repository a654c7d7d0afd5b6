#pragma once

#include <stdexcept>

namespace duhop {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation outside a function's or weight's domain (x=0 for a negative
/// power weight, t=0 envelopes, invalid interval endpoints, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid numeric parameter (tolerance <= 0, p outside (1,inf), u outside (0,1), ...).
class ParamError : public Error {
 public:
  using Error::Error;
};

/// Tabulated weight queried beyond its sampled range.
class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

class UnknownPresetError : public Error {
 public:
  using Error::Error;
};

/// A declared singularity too strong to integrate (finite exponent >= 1,
/// tail exponent <= 1).
class NonIntegrableError : public Error {
 public:
  using Error::Error;
};

class NotMultiplicativeError : public Error {
 public:
  using Error::Error;
};

/// A lower-bound curve decreased by more than its error bars; signals a
/// quadrature or oracle defect, never a legitimate outcome.
class MonotonicityViolation : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace duhop
