#include "mcddpm/error.hpp"

namespace mcddpm {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::ShapeMismatch: return "shape mismatch";
    case ErrorKind::MaskMismatch: return "mask mismatch";
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::Io: return "I/O error";
    case ErrorKind::BadMagic: return "bad magic";
    case ErrorKind::UnsupportedVersion: return "unsupported version";
    case ErrorKind::Truncated: return "truncated file";
    case ErrorKind::Format: return "format error";
    case ErrorKind::Integrity: return "integrity error";
    case ErrorKind::ArchitectureMismatch: return "architecture mismatch";
    case ErrorKind::NumericalFailure: return "numerical failure";
    case ErrorKind::InvariantViolation: return "invariant violation";
  }
  return "unknown error";
}

}  // namespace mcddpm
