#pragma once

#include <stdexcept>
#include <string>

namespace xview {

/// Failure categories. Each maps onto one CLI exit code.
enum class ErrorKind {
  validation,     // malformed input, failed schema or precondition
  structural,     // wrong counts, mismatched dimensions, disconnected graphs
  configuration,  // invalid parameter (non-positive rho, mismatched cells)
  domain,         // argument outside the function's domain
  degenerate,     // math has no unique answer (zero variance, collinear)
  io,             // filesystem problems
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// 0 success, 2 validation failure, 3 degenerate math, 4 IO.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::degenerate:
      return 3;
    case ErrorKind::io:
      return 4;
    default:
      return 2;
  }
}

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::structural: return "structural";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::domain: return "domain";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace xview
