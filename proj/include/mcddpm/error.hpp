#pragma once

#include <stdexcept>
#include <string>

namespace mcddpm {

enum class ErrorKind {
  InvalidArgument,   // precondition or config violation
  ShapeMismatch,
  MaskMismatch,
  Domain,            // mathematically undefined request (e.g. division by a zero sigma)
  Io,
  BadMagic,
  UnsupportedVersion,
  Truncated,
  Format,
  Integrity,
  ArchitectureMismatch,
  NumericalFailure,  // NaN / Inf produced during training
  InvariantViolation,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const char* what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace mcddpm
