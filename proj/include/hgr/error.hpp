#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hgr {

enum class ErrorCode {
  NegativeEntry,
  AllZero,
  SupportViolation,
  NonStrictDistribution,
  ShapeMismatch,
  NotOrthonormal,
  NotSymmetric,
  DegenerateTopGap,
  DegenerateGap,
  SingularCovariance,
  MaxItersExceeded,
  IndexOutOfRange,
  BadRange,
  EmptyRange,
  SizeLimit,
  Parse,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every library failure is reported through this exception; `code()` lets
/// callers branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::SupportViolation: return "SupportViolation";
    case ErrorCode::NonStrictDistribution: return "NonStrictDistribution";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NotOrthonormal: return "NotOrthonormal";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::DegenerateTopGap: return "DegenerateTopGap";
    case ErrorCode::DegenerateGap: return "DegenerateGap";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::MaxItersExceeded: return "MaxItersExceeded";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::BadRange: return "BadRange";
    case ErrorCode::EmptyRange: return "EmptyRange";
    case ErrorCode::SizeLimit: return "SizeLimit";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

// Warnings go to stderr; the library never aborts on them.
void warn(std::string_view message);

}  // namespace hgr
