#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fatigue {

// Error taxonomy shared by the whole library. The C API maps these 1:1 onto
// status codes, so keep the enumerators stable.
enum class ErrorCode : int {
  domain_error = 1,
  shape_error = 2,
  design_error = 3,
  length_error = 4,
  io_error = 5,
  format_error = 6,
  insufficient_classes = 7,
  numeric_error = 8,
  invalid_argument = 9,
  internal_error = 10,
  check_failed = 11,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::domain_error: return "domain_error";
    case ErrorCode::shape_error: return "shape_error";
    case ErrorCode::design_error: return "design_error";
    case ErrorCode::length_error: return "length_error";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::format_error: return "format_error";
    case ErrorCode::insufficient_classes: return "insufficient_classes";
    case ErrorCode::numeric_error: return "numeric_error";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::internal_error: return "internal_error";
    case ErrorCode::check_failed: return "check_failed";
  }
  return "unknown";
}

}  // namespace fatigue
