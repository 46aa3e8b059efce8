#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sfmscale {

enum class ErrorCode {
  kUnsupportedCameraModel,
  kMalformedLine,
  kOddObservationTriples,
  kOddTrackPairs,
  kReferentialIntegrity,
  kIoError,
  kUnsupportedDepthFormat,
  kDimensionMismatch,
  kValueOutOfRange,
  kImageNotRegistered,
  kInsufficientSamples,
  kNonPositiveRatio,
  kNonMetricInput,
  kEmptyOverlap,
  kNonPositiveGroundTruth,
  kOverlappingSplits,
  kExcludedDataset,
  kDegenerateSpec,
  kAnchorNotRegistered,
  kInvalidArgument,
};

// Stable CamelCase name used in error JSON records, e.g. "InsufficientSamples".
std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const { return ErrorCodeName(code_); }

 private:
  ErrorCode code_;
};

}  // namespace sfmscale
