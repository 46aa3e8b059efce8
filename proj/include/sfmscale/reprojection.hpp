#pragma once

#include <map>
#include <optional>
#include <vector>

#include "sfmscale/depth_io.hpp"
#include "sfmscale/sfm_model.hpp"

namespace sfmscale {

struct BackprojectedSample {
  int u = 0;
  int v = 0;
  Eigen::Vector3d point;  // camera frame, millimeters
};

// Lifts every valid pixel to the camera frame. The integer pixel index is the
// sample coordinate: point = ((u - cx) d / fx, (v - cy) d / fy, d).
std::vector<BackprojectedSample> Backproject(const DepthMap& depth,
                                             const CameraIntrinsics& intrinsics);

// Forward-splats a metric anchor depth map into a target view. Poses may be in
// either convention and must share the metric world frame. Samples round to
// the nearest target pixel; the nearest depth wins and ties keep the first
// sample in anchor scan order. Untouched pixels stay invalid.
DepthMap ReprojectDepth(const DepthMap& anchor_depth, const Pose& anchor_pose,
                        const Pose& target_pose,
                        const CameraIntrinsics& anchor_intrinsics,
                        const CameraIntrinsics& target_intrinsics,
                        std::optional<ImageSize> target_size = std::nullopt);

struct SequenceReprojection {
  std::map<image_t, DepthMap> depths;
  // Requested frames with no co-registered pose.
  std::vector<image_t> unregistered;
};

struct SequenceReprojectionInput {
  const DepthMap* anchor_depth = nullptr;
  image_t anchor_id = 0;
  std::map<image_t, Pose> metric_poses;
  std::map<image_t, CameraIntrinsics> intrinsics;
  // Frames of the sequence; empty means every key of metric_poses.
  std::vector<image_t> frames;
  std::optional<ImageSize> target_size;
};

// Reprojects into every co-registered frame except the anchor. `jobs` bounds
// the worker threads; output is independent of it.
SequenceReprojection ReprojectSequence(const SequenceReprojectionInput& input,
                                       int jobs = 1);

}  // namespace sfmscale
