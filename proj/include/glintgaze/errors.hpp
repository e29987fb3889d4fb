#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace glintgaze {

enum class ErrorCode {
  kInsufficientLines,
  kSingularGeometry,
  kDegenerateProjection,
  kNoFixation,
  kInsideSphere,
  kInsufficientGlints,
  kPupilRayMiss,
  kPupilAbsent,
  kDegenerateAxis,
  kEmptyInput,
  kGimbalDegenerate,
  kUnderdetermined,
  kSingularBasis,
  kDegenerateOutput,
  kDivergedTraining,
  kInsufficientCalibration,
  kInvalidConfig,
  kParseError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInsufficientLines: return "InsufficientLines";
    case ErrorCode::kSingularGeometry: return "SingularGeometry";
    case ErrorCode::kDegenerateProjection: return "DegenerateProjection";
    case ErrorCode::kNoFixation: return "NoFixation";
    case ErrorCode::kInsideSphere: return "InsideSphere";
    case ErrorCode::kInsufficientGlints: return "InsufficientGlints";
    case ErrorCode::kPupilRayMiss: return "PupilRayMiss";
    case ErrorCode::kPupilAbsent: return "PupilAbsent";
    case ErrorCode::kDegenerateAxis: return "DegenerateAxis";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kGimbalDegenerate: return "GimbalDegenerate";
    case ErrorCode::kUnderdetermined: return "Underdetermined";
    case ErrorCode::kSingularBasis: return "SingularBasis";
    case ErrorCode::kDegenerateOutput: return "DegenerateOutput";
    case ErrorCode::kDivergedTraining: return "DivergedTraining";
    case ErrorCode::kInsufficientCalibration: return "InsufficientCalibration";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every recoverable failure in the library is reported as a GazeError
/// carrying a machine-readable code.
class GazeError : public std::runtime_error {
 public:
  GazeError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace glintgaze
