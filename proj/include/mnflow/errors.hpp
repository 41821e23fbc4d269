#pragma once

#include <stdexcept>
#include <string>

namespace mnflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Arguments that violate an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raster or flow file that cannot be parsed.
class FormatError : public Error {
 public:
  enum class Kind { kBadMagic, kBadHeader, kBadMaxval, kTruncated, kBadSentinel };

  FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// The solver produced a non-finite value.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace mnflow
