#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace raylift {

enum class ErrorCode {
  kInvalidArgument,
  kNonConvergent,
  kBehindCamera,
  kRayAtHorizon,
  kDegenerateComparison,
  kTooFewCorrespondences,
  kAllKeypointsMasked,
  kDegenerate,
  kEmptyTrajectory,
  kLengthMismatch,
  kTooShort,
  kNonPositiveRadius,
  kDimensionMismatch,
  kDegenerateInput,
  kNotWatertight,
  kDegenerateArm,
  kEmptySet,
  kDegenerateRing,
  kNonFiniteLoss,
  kInsufficientCorpus,
  kShapeMismatch,
  kDegenerateConfiguration,
  kNotARotation,
  kJointMissing,
  kZeroAreaCrop,
  kFovExhausted,
  kSchema,
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNonConvergent: return "NonConvergent";
    case ErrorCode::kBehindCamera: return "BehindCamera";
    case ErrorCode::kRayAtHorizon: return "RayAtHorizon";
    case ErrorCode::kDegenerateComparison: return "DegenerateComparison";
    case ErrorCode::kTooFewCorrespondences: return "TooFewCorrespondences";
    case ErrorCode::kAllKeypointsMasked: return "AllKeypointsMasked";
    case ErrorCode::kDegenerate: return "Degenerate";
    case ErrorCode::kEmptyTrajectory: return "EmptyTrajectory";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kNonPositiveRadius: return "NonPositiveRadius";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kNotWatertight: return "NotWatertight";
    case ErrorCode::kDegenerateArm: return "DegenerateArm";
    case ErrorCode::kEmptySet: return "EmptySet";
    case ErrorCode::kDegenerateRing: return "DegenerateRing";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kInsufficientCorpus: return "InsufficientCorpus";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kDegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::kNotARotation: return "NotARotation";
    case ErrorCode::kJointMissing: return "JointMissing";
    case ErrorCode::kZeroAreaCrop: return "ZeroAreaCrop";
    case ErrorCode::kFovExhausted: return "FovExhausted";
    case ErrorCode::kSchema: return "Schema";
  }
  return "Unknown";
}

// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace raylift
