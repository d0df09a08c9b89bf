#pragma once

#include <stdexcept>
#include <string>

namespace deltastar {

enum class ErrorCode {
  BadParameters,
  NonUnitDirection,
  CoincidentArms,
  NonpositiveLength,
  UnsupportedN,
  SizeMismatch,
  ZeroDistance,
  DomainError,
  GridTooCoarse,
  EigensolveFailure,
  NoCrossing,
  BracketFailure,
  NotConverged,
  DegenerateAngle,
  AllStartsFailed,
  ParseError
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::BadParameters: return "BadParameters";
    case ErrorCode::NonUnitDirection: return "NonUnitDirection";
    case ErrorCode::CoincidentArms: return "CoincidentArms";
    case ErrorCode::NonpositiveLength: return "NonpositiveLength";
    case ErrorCode::UnsupportedN: return "UnsupportedN";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::ZeroDistance: return "ZeroDistance";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::EigensolveFailure: return "EigensolveFailure";
    case ErrorCode::NoCrossing: return "NoCrossing";
    case ErrorCode::BracketFailure: return "BracketFailure";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::DegenerateAngle: return "DegenerateAngle";
    case ErrorCode::AllStartsFailed: return "AllStartsFailed";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/** Every failure in the library surfaces as this, tagged with a code. */
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// validation problems (bad input) as opposed to numerical trouble
  bool is_validation() const noexcept {
    switch (code_) {
      case ErrorCode::BadParameters:
      case ErrorCode::NonUnitDirection:
      case ErrorCode::CoincidentArms:
      case ErrorCode::NonpositiveLength:
      case ErrorCode::UnsupportedN:
      case ErrorCode::SizeMismatch:
      case ErrorCode::DomainError:
      case ErrorCode::DegenerateAngle:
      case ErrorCode::ParseError:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace deltastar
