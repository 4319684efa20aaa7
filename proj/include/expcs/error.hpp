#pragma once

#include <stdexcept>
#include <string>

namespace expcs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid construction parameters (sizes, degrees, slack values).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Vector or matrix dimensions do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A value lies outside the domain of the function (negative mean, NaN).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Exact enumeration would exceed the caller-supplied budget.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// A right node has no neighbours, so no cover set exists.
class UncoverableError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace expcs
