//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef STGG_ERROR_HPP_
#define STGG_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace stgg {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unsupported input data: SMILES, token sequences, files.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A precondition the caller was responsible for was violated.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// An internal invariant failed. Indicates a bug, never bad input.
class InvariantError : public Error {
 public:
  using Error::Error;
};

enum class FormatErrorKind { kIo, kMalformed, kVersionMismatch, kHashMismatch };

/// Failure while loading a persisted artifact (vocab, checkpoint, spec).
class FormatError : public DataError {
 public:
  FormatError(FormatErrorKind kind, const std::string &what)
      : DataError(what), kind_(kind) { }

  FormatErrorKind kind() const noexcept { return kind_; }

 private:
  FormatErrorKind kind_;
};

#define STGG_CHECK(cond, msg)                                                  \
  do {                                                                         \
    if (!(cond))                                                               \
      throw ::stgg::InvariantError(std::string(__FILE__) + ":" +               \
                                   std::to_string(__LINE__) + ": " + (msg));   \
  } while (false)

}  // namespace stgg

#endif  // STGG_ERROR_HPP_
