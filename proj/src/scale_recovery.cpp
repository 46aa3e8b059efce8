#include "sfmscale/scale_recovery.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sfmscale/error.hpp"
#include "text_util.hpp"

namespace sfmscale {

DepthMap ProjectSparseDepth(const SparseModel& model, image_t view_image_id,
                            const CameraIntrinsics& intrinsics,
                            SparseProjectionOptions options) {
  const auto it = model.images.find(view_image_id);
  if (it == model.images.end()) {
    throw Error(ErrorCode::kImageNotRegistered,
                "image " + std::to_string(view_image_id) +
                    " is not registered in the model");
  }
  const RegisteredImage& view = it->second;
  const Pose world_to_cam = view.pose.As(PoseConvention::kWorldToCamera);
  const Eigen::Matrix3d rotation = world_to_cam.RotationMatrix();

  DepthMap depth({intrinsics.width, intrinsics.height}, DepthUnit::kUnscaled);
  const auto splat = [&](const Eigen::Vector3d& world) {
    const Eigen::Vector3d cam = rotation * world + world_to_cam.translation;
    if (!(cam.z() > 0.0)) return;
    const double x = intrinsics.fx * cam.x() / cam.z() + intrinsics.cx;
    const double y = intrinsics.fy * cam.y() / cam.z() + intrinsics.cy;
    const double u = std::floor(x + 0.5);
    const double v = std::floor(y + 0.5);
    if (!(u >= 0.0 && v >= 0.0 && u < intrinsics.width &&
          v < intrinsics.height)) {
      return;
    }
    double& slot = depth.at(static_cast<int>(u), static_cast<int>(v));
    if (slot == 0.0 || cam.z() < slot) slot = cam.z();
  };

  if (options.tracked_only) {
    for (const auto& obs : view.observations) {
      if (obs.point3d_id) splat(model.points.at(*obs.point3d_id).position);
    }
  } else {
    for (const auto& [id, point] : model.points) splat(point.position);
  }
  return depth;
}

double Median(std::span<double> values) {
  if (values.empty()) {
    throw Error(ErrorCode::kInsufficientSamples, "median of an empty set");
  }
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return (lower + upper) / 2.0;
}

ScaleResult RecoverScale(const DepthMap& metric, const DepthMap& unscaled,
                         std::size_t min_samples) {
  if (metric.unit() != DepthUnit::kMillimeters) {
    throw Error(ErrorCode::kNonMetricInput,
                "anchor depth must be in millimeters, got " +
                    std::string(DepthUnitName(metric.unit())));
  }
  const auto common = ValidIntersection(metric, unscaled);
  if (common.size() < min_samples) {
    throw Error(ErrorCode::kInsufficientSamples,
                std::to_string(common.size()) +
                    " common valid pixels, need at least " +
                    std::to_string(min_samples));
  }
  std::vector<double> ratios;
  ratios.reserve(common.size());
  for (const std::size_t i : common) {
    const double r = metric[i] / unscaled[i];
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw Error(ErrorCode::kNonPositiveRatio,
                  "ratio " + detail::FormatDouble(r, 6) + " at pixel " +
                      std::to_string(i));
    }
    ratios.push_back(r);
  }

  ScaleResult result;
  result.sample_count = ratios.size();
  result.scale = Median(ratios);
  for (double& r : ratios) r = std::abs(r - result.scale);
  result.ratio_median_abs_deviation = Median(ratios);
  return result;
}

Pose MetricizePose(const Pose& pose, double scale) {
  Pose cam_to_world = pose.As(PoseConvention::kCameraToWorld);
  cam_to_world.translation *= scale;
  return cam_to_world;
}

std::map<image_t, Pose> MetricizePoses(const SparseModel& model,
                                       const ScaleResult& scale) {
  std::map<image_t, Pose> out;
  for (const auto& [id, image] : model.images) {
    out.emplace(id, MetricizePose(image.pose, scale.scale));
  }
  return out;
}

std::map<point3d_t, Eigen::Vector3d> MetricizePoints(const SparseModel& model,
                                                     const ScaleResult& scale) {
  std::map<point3d_t, Eigen::Vector3d> out;
  for (const auto& [id, point] : model.points) {
    out.emplace(id, point.position * scale.scale);
  }
  return out;
}

}  // namespace sfmscale
