#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace esrk {

/// Base of every error raised by the core library. The C API maps each
/// subclass to one status code.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Shape or dimension mismatch between related arrays.
class StructuralError : public Error {
public:
  using Error::Error;
};

/// Heuristic constraints that cannot be applied together (duplicate
/// targets, chained substitutions, self reference).
class ConstraintError : public Error {
public:
  using Error::Error;
};

/// Malformed heuristic or document text. `position` is a 0-based byte offset
/// into the offending input.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), detail_(what), position_(position) {}

  std::size_t position() const noexcept { return position_; }
  const std::string& detail() const noexcept { return detail_; }

private:
  std::string detail_;
  std::size_t position_;
};

class IoError : public Error {
public:
  using Error::Error;
};

class UsageError : public Error {
public:
  using Error::Error;
};

} // namespace esrk
