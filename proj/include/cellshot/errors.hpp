#pragma once

#include <stdexcept>
#include <string>

namespace cellshot {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument (empty vector, out-of-range fraction, mismatched sizes).
class ArgumentError : public Error {
public:
  using Error::Error;
};

/// A tuning-constant search could not bracket the requested target.
class CalibrationError : public Error {
public:
  using Error::Error;
};

/// Design without enough spread to identify the coefficients.
class DegenerateDesignError : public Error {
public:
  using Error::Error;
};

/// Response with zero MAD; scale-relative tolerances would vanish.
class DegenerateResponseError : public Error {
public:
  using Error::Error;
};

/// The shooting initializer could not be computed.
class InitializationError : public Error {
public:
  using Error::Error;
};

/// A robust estimator failed (e.g. no usable elemental subsets).
class EstimationError : public Error {
public:
  using Error::Error;
};

/// Malformed CSV input.
class IngestionError : public Error {
public:
  using Error::Error;
};

} // namespace cellshot
