#pragma once

#include <stdexcept>
#include <string>

namespace reynet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Arguments with incompatible sizes or shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A precondition on a value (range, distinctness, validity) failed.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A brute-force routine was asked for a group too large to enumerate.
class ComplexityError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing a serialized artifact failed.
class FormatError : public Error {
 public:
  enum class Kind { io, bad_magic, version_mismatch, truncated, malformed };

  FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace reynet
