#include "sfmscale/reprojection.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "sfmscale/error.hpp"

namespace sfmscale {

std::vector<BackprojectedSample> Backproject(
    const DepthMap& depth, const CameraIntrinsics& intrinsics) {
  std::vector<BackprojectedSample> out;
  out.reserve(depth.valid_count());
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      const double d = depth.at(u, v);
      if (!DepthMap::IsValidValue(d)) continue;
      out.push_back({u, v,
                     Eigen::Vector3d((u - intrinsics.cx) * d / intrinsics.fx,
                                     (v - intrinsics.cy) * d / intrinsics.fy,
                                     d)});
    }
  }
  return out;
}

DepthMap ReprojectDepth(const DepthMap& anchor_depth, const Pose& anchor_pose,
                        const Pose& target_pose,
                        const CameraIntrinsics& anchor_intrinsics,
                        const CameraIntrinsics& target_intrinsics,
                        std::optional<ImageSize> target_size) {
  if (anchor_depth.unit() != DepthUnit::kMillimeters) {
    throw Error(ErrorCode::kNonMetricInput,
                "reprojection needs a metric anchor, got " +
                    std::string(DepthUnitName(anchor_depth.unit())));
  }
  const ImageSize size = target_size.value_or(
      ImageSize{target_intrinsics.width, target_intrinsics.height});

  // anchor camera -> target camera: x_t = R_t^T R_a x_a + R_t^T (c_a - c_t).
  // Bitwise-equal rotations take the exact identity so that a warp onto the
  // anchor view itself returns every sample to its own pixel and depth.
  const Pose anchor = anchor_pose.As(PoseConvention::kCameraToWorld);
  const Pose target = target_pose.As(PoseConvention::kCameraToWorld);
  const Eigen::Matrix3d target_rot_t = target.RotationMatrix().transpose();
  const Eigen::Matrix3d rotation =
      BitwiseEqual(anchor.rotation, target.rotation)
          ? Eigen::Matrix3d::Identity()
          : Eigen::Matrix3d(target_rot_t * anchor.RotationMatrix());
  const Eigen::Vector3d translation =
      target_rot_t * (anchor.translation - target.translation);

  DepthMap out(size, DepthUnit::kMillimeters);
  for (const auto& sample : Backproject(anchor_depth, anchor_intrinsics)) {
    const Eigen::Vector3d p = rotation * sample.point + translation;
    const double z = p.z();
    if (!(z > 0.0)) continue;
    const double u =
        std::floor(target_intrinsics.fx * p.x() / z + target_intrinsics.cx + 0.5);
    const double v =
        std::floor(target_intrinsics.fy * p.y() / z + target_intrinsics.cy + 0.5);
    if (!(u >= 0.0 && v >= 0.0 && u < size.width && v < size.height)) continue;
    double& slot = out.at(static_cast<int>(u), static_cast<int>(v));
    if (slot == 0.0 || z < slot) slot = z;
  }
  return out;
}

SequenceReprojection ReprojectSequence(const SequenceReprojectionInput& input,
                                       int jobs) {
  if (input.anchor_depth == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "no anchor depth map");
  }
  if (input.anchor_depth->unit() != DepthUnit::kMillimeters) {
    throw Error(ErrorCode::kNonMetricInput,
                "reprojection needs a metric anchor, got " +
                    std::string(DepthUnitName(input.anchor_depth->unit())));
  }
  const auto anchor_pose = input.metric_poses.find(input.anchor_id);
  if (anchor_pose == input.metric_poses.end()) {
    throw Error(ErrorCode::kAnchorNotRegistered,
                "anchor image " + std::to_string(input.anchor_id) +
                    " has no co-registered pose");
  }
  const auto intrinsics_of = [&](image_t id) -> const CameraIntrinsics& {
    const auto it = input.intrinsics.find(id);
    if (it == input.intrinsics.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "no intrinsics for image " + std::to_string(id));
    }
    return it->second;
  };
  const CameraIntrinsics& anchor_intrinsics = intrinsics_of(input.anchor_id);

  std::vector<image_t> frames = input.frames;
  if (frames.empty()) {
    for (const auto& [id, pose] : input.metric_poses) frames.push_back(id);
  }
  std::sort(frames.begin(), frames.end());
  frames.erase(std::unique(frames.begin(), frames.end()), frames.end());

  SequenceReprojection result;
  std::vector<image_t> targets;
  for (const image_t id : frames) {
    if (id == input.anchor_id) continue;
    if (!input.metric_poses.count(id)) {
      result.unregistered.push_back(id);
    } else {
      intrinsics_of(id);
      targets.push_back(id);
    }
  }

  std::vector<DepthMap> maps(targets.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < targets.size(); k = next++) {
      const image_t id = targets[k];
      maps[k] = ReprojectDepth(*input.anchor_depth, anchor_pose->second,
                               input.metric_poses.at(id), anchor_intrinsics,
                               input.intrinsics.at(id), input.target_size);
    }
  };
  const int threads =
      std::clamp<int>(jobs, 1, std::max<int>(1, static_cast<int>(targets.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (std::size_t k = 0; k < targets.size(); ++k) {
    result.depths.emplace(targets[k], std::move(maps[k]));
  }
  return result;
}

}  // namespace sfmscale
