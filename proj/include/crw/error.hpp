#ifndef CRW_ERROR_HPP
#define CRW_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace crw {

enum class ErrorCode {
  DimensionMismatch,
  NonBinaryConstituency,
  NegativeRate,
  TooManyControls,
  LpFailure,
  DomainError,
  InvalidParams,
  UnsupportedCombination,
  EvaluationError,
  EmptyRegion,
  NegativeStateViolation,
  InvalidRate,
  ConfigParseError,
  UnknownCheck,
  GradientUnavailable,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonBinaryConstituency: return "NonBinaryConstituency";
    case ErrorCode::NegativeRate: return "NegativeRate";
    case ErrorCode::TooManyControls: return "TooManyControls";
    case ErrorCode::LpFailure: return "LPFailure";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::UnsupportedCombination: return "UnsupportedCombination";
    case ErrorCode::EvaluationError: return "EvaluationError";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::NegativeStateViolation: return "NegativeStateViolation";
    case ErrorCode::InvalidRate: return "InvalidRate";
    case ErrorCode::ConfigParseError: return "ConfigParseError";
    case ErrorCode::UnknownCheck: return "UnknownCheck";
    case ErrorCode::GradientUnavailable: return "GradientUnavailable";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace crw

#endif  // CRW_ERROR_HPP
