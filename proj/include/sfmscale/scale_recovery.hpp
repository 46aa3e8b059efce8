#pragma once

#include <cstddef>
#include <map>
#include <span>

#include "sfmscale/depth_io.hpp"
#include "sfmscale/sfm_model.hpp"

namespace sfmscale {

inline constexpr std::size_t kDefaultMinSamples = 50;

struct ScaleResult {
  double scale = 1.0;  // millimeters per model unit
  std::size_t sample_count = 0;
  double ratio_median_abs_deviation = 0.0;
};

struct SparseProjectionOptions {
  // Project only the points observed by the view instead of the full cloud.
  bool tracked_only = false;
};

// Z-buffered projection of the sparse cloud into one registered view. Points
// land on the nearest integer pixel; the nearest depth wins, ties keep the
// lower point id.
DepthMap ProjectSparseDepth(const SparseModel& model, image_t view_image_id,
                            const CameraIntrinsics& intrinsics,
                            SparseProjectionOptions options = {});

// Sample median; even counts average the two middle values. Reorders `values`.
double Median(std::span<double> values);

// s = median(metric / unscaled) over pixels valid in both maps.
ScaleResult RecoverScale(const DepthMap& metric, const DepthMap& unscaled,
                         std::size_t min_samples = kDefaultMinSamples);

// Camera-to-world poses with translations (camera centers) scaled by s.
// Rotations are copied untouched.
Pose MetricizePose(const Pose& pose, double scale);
std::map<image_t, Pose> MetricizePoses(const SparseModel& model,
                                       const ScaleResult& scale);

std::map<point3d_t, Eigen::Vector3d> MetricizePoints(const SparseModel& model,
                                                     const ScaleResult& scale);

}  // namespace sfmscale
