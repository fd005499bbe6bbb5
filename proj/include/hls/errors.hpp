#pragma once

#include <stdexcept>
#include <string>

namespace hls {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad parameters, malformed files, unsupported configurations.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A point map evaluated where it is undefined (inversion center, Cayley pole).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Two fields that must share a grid do not.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// Root bracketing failed, a search found no witness, or a fit degenerated.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace hls
