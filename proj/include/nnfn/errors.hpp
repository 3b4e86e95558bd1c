#pragma once

#include <stdexcept>
#include <string>

namespace nnfn {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied value violates a precondition.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Non-finite iterate, SVD breakdown or a violated solver bound.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// File could not be read, decoded or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Broken internal invariant (e.g. a pixel no patch covers).
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace nnfn
