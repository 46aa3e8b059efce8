#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sfmscale/depth_io.hpp"
#include "sfmscale/sfm_model.hpp"

namespace sfmscale {

enum class SurfaceKind { kPlane, kSpherePatch };

// Synthetic scene with known metric geometry. All geometric quantities are in
// millimeters and, unless noted, expressed in the anchor camera frame.
struct SceneSpec {
  SurfaceKind surface = SurfaceKind::kPlane;
  std::size_t n_points = 200;
  int n_frames = 5;
  // Frames listed in the sequence but absent from the model.
  int n_unregistered = 0;
  double true_scale = 1.0;
  CameraIntrinsics intrinsics{1, CameraModel::kPinhole, 128, 128,
                              110.0, 112.0, 63.3, 64.6};
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  // Distance from the anchor center to the surface along the optical axis.
  double surface_depth = 100.0;
  // Plane: n . x = surface_depth * n.z, with n a unit normal.
  Eigen::Vector3d plane_normal = Eigen::Vector3d::UnitZ();
  // Sphere patch: ball of this radius centered behind the surface point.
  double sphere_radius = 60.0;

  // Frame k sits at k * step_translation, rotated by exp(k * step_rotation).
  Eigen::Vector3d step_translation{1.5, -1.0, 2.0};
  Eigen::Vector3d step_rotation{0.004, -0.006, 0.003};
  // Place the anchor at a seeded random world pose instead of the origin.
  bool random_world_frame = true;
  // Round anchor depths to float32 (and place points at the rounded depths)
  // so that a Pf export reloads without changing the recovered scale.
  bool float32_anchor = false;
};

struct SyntheticScene {
  SceneSpec spec;
  // Model in units of 1/true_scale, as a monocular reconstruction would be.
  SparseModel model;
  DepthMap anchor_depth;  // analytic, millimeters
  image_t anchor_id = 1;
  std::string anchor_name;
  std::map<image_t, Pose> metric_poses;  // CAMERA_TO_WORLD, millimeters
  std::map<point3d_t, Eigen::Vector3d> metric_points;
  // Every frame name of the sequence, registered or not.
  std::vector<std::string> frame_names;
};

// Throws kDegenerateSpec when the scale is not positive, the anchor or a frame
// does not face the surface, or too few anchor pixels see it.
SyntheticScene MakeScene(const SceneSpec& spec);

// Analytic surface depth along the anchor ray through pixel (u, v); 0 if the
// ray misses.
double AnalyticAnchorDepth(const SceneSpec& spec, double u, double v);

// Writes sparse/{cameras,images,points3D}.txt, anchor.depth.pfm, frames.txt
// and truth.json under `dir`.
void WriteScene(const SyntheticScene& scene, const std::filesystem::path& dir);

}  // namespace sfmscale
