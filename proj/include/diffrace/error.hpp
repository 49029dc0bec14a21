#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace diffrace {

enum class ErrorCode {
  InvalidScene,
  FluxOutOfRange,
  DuplicateSolenoid,
  CollinearTriple,
  GeometricAngle,
  PointOnSegment,
  InvalidSequence,
  GridTooCoarse,
  InvalidWindow,
  EpsilonTooLarge,
  SingleSolenoid,
  BadDelta,
  BadParameter,
  ExcisionTooLarge,
  InstanceTooLarge,
  DegenerateHessian,
  HessianMismatch,
  NoConvergence,
  SchemaError,
  UnknownKey,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidScene: return "InvalidScene";
    case ErrorCode::FluxOutOfRange: return "FluxOutOfRange";
    case ErrorCode::DuplicateSolenoid: return "DuplicateSolenoid";
    case ErrorCode::CollinearTriple: return "CollinearTriple";
    case ErrorCode::GeometricAngle: return "GeometricAngle";
    case ErrorCode::PointOnSegment: return "PointOnSegment";
    case ErrorCode::InvalidSequence: return "InvalidSequence";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::InvalidWindow: return "InvalidWindow";
    case ErrorCode::EpsilonTooLarge: return "EpsilonTooLarge";
    case ErrorCode::SingleSolenoid: return "SingleSolenoid";
    case ErrorCode::BadDelta: return "BadDelta";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::ExcisionTooLarge: return "ExcisionTooLarge";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::DegenerateHessian: return "DegenerateHessian";
    case ErrorCode::HessianMismatch: return "HessianMismatch";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::UnknownKey: return "UnknownKey";
  }
  return "Unknown";
}

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// One problem found while validating a scene or a run configuration.
/// `where` is a field path ("solenoids[0].flux") or an index list ("0,1,2").
struct Violation {
  ErrorCode code;
  std::string where;
  std::string message;
};

/// Raised when validation finds one or more violations; all of them are kept.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations)
      : Error(violations.empty() ? ErrorCode::InvalidScene : violations.front().code,
              summarize(violations)),
        violations_(std::move(violations)) {}

  const std::vector<Violation>& violations() const noexcept { return violations_; }

  bool has(ErrorCode code) const noexcept {
    for (const auto& v : violations_)
      if (v.code == code) return true;
    return false;
  }

 private:
  static std::string summarize(const std::vector<Violation>& vs) {
    std::string out = std::to_string(vs.size()) + " violation(s)";
    for (const auto& v : vs) {
      out += "; ";
      out += to_string(v.code);
      if (!v.where.empty()) out += " at " + v.where;
      if (!v.message.empty()) out += ": " + v.message;
    }
    return out;
  }

  std::vector<Violation> violations_;
};

}  // namespace diffrace
