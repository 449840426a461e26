#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sparsenet {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A hyperparameter or run configuration violates its constraints.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Caller-supplied data is out of its valid domain (e.g. a label index).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A file on disk does not follow its declared format.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  explicit FormatError(const std::string& what) : Error(what) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_ = 0;
};

/// Undefined arithmetic such as a ratio with a zero denominator.
class ArithmeticError : public Error {
 public:
  using Error::Error;
};

}  // namespace sparsenet
