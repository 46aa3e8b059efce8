#include "sfmscale/error.hpp"

namespace sfmscale {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnsupportedCameraModel: return "UnsupportedCameraModel";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kOddObservationTriples: return "OddObservationTriples";
    case ErrorCode::kOddTrackPairs: return "OddTrackPairs";
    case ErrorCode::kReferentialIntegrity: return "ReferentialIntegrity";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kUnsupportedDepthFormat: return "UnsupportedDepthFormat";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kValueOutOfRange: return "ValueOutOfRange";
    case ErrorCode::kImageNotRegistered: return "ImageNotRegistered";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kNonPositiveRatio: return "NonPositiveRatio";
    case ErrorCode::kNonMetricInput: return "NonMetricInput";
    case ErrorCode::kEmptyOverlap: return "EmptyOverlap";
    case ErrorCode::kNonPositiveGroundTruth: return "NonPositiveGroundTruth";
    case ErrorCode::kOverlappingSplits: return "OverlappingSplits";
    case ErrorCode::kExcludedDataset: return "ExcludedDataset";
    case ErrorCode::kDegenerateSpec: return "DegenerateSpec";
    case ErrorCode::kAnchorNotRegistered: return "AnchorNotRegistered";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace sfmscale
