#ifndef ANISOCRIT_ERROR_HPP
#define ANISOCRIT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace anisocrit {

enum class ErrorKind {
  DimensionMismatch,
  NotPositiveDefinite,
  InvalidArgument,
  UndefinedGradient,
  NonConvergence,
  DivergentIntegral,
  UnsupportedReduction,
  Resolution,
  ZeroFunction,
  Degenerate,
  GeometryViolation,
  Consistency,
  EmptyDomain,
  DisconnectedDomain,
  Config,
  Io,
};

const char* to_string(ErrorKind kind);

/// Exception carrying a machine-checkable category alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::NotPositiveDefinite: return "not-positive-definite";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::UndefinedGradient: return "undefined-gradient";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::DivergentIntegral: return "divergent-integral";
    case ErrorKind::UnsupportedReduction: return "unsupported-reduction";
    case ErrorKind::Resolution: return "resolution";
    case ErrorKind::ZeroFunction: return "zero-function";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::GeometryViolation: return "geometry-violation";
    case ErrorKind::Consistency: return "consistency";
    case ErrorKind::EmptyDomain: return "empty-domain";
    case ErrorKind::DisconnectedDomain: return "disconnected-domain";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace anisocrit

#endif  // ANISOCRIT_ERROR_HPP
