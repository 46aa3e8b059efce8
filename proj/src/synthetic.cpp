#include "sfmscale/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "sfmscale/error.hpp"

namespace sfmscale {
namespace {

Eigen::Matrix3d ExpRotation(const Eigen::Vector3d& w) {
  const double angle = w.norm();
  if (angle == 0.0) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

struct CameraToWorld {
  Eigen::Matrix3d rotation;
  Eigen::Vector3d center;

  Eigen::Vector3d ToCamera(const Eigen::Vector3d& world) const {
    return rotation.transpose() * (world - center);
  }
};

[[noreturn]] void Degenerate(const std::string& why) {
  throw Error(ErrorCode::kDegenerateSpec, why);
}

std::string FrameName(int k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame%04d.png", k);
  return buf;
}

}  // namespace

double AnalyticAnchorDepth(const SceneSpec& spec, double u, double v) {
  const auto& K = spec.intrinsics;
  const Eigen::Vector3d dir((u - K.cx) / K.fx, (v - K.cy) / K.fy, 1.0);
  double t = 0.0;
  if (spec.surface == SurfaceKind::kPlane) {
    const Eigen::Vector3d n = spec.plane_normal.normalized();
    const double denom = n.dot(dir);
    if (!(denom > 0.0)) return 0.0;
    t = spec.surface_depth * n.z() / denom;
  } else {
    const Eigen::Vector3d c(0.0, 0.0, spec.surface_depth + spec.sphere_radius);
    const double a = dir.squaredNorm();
    const double b = -2.0 * dir.dot(c);
    const double cc = c.squaredNorm() - spec.sphere_radius * spec.sphere_radius;
    const double disc = b * b - 4.0 * a * cc;
    if (disc < 0.0) return 0.0;
    // b < 0 for rays toward the ball; this form avoids cancellation.
    const double q = -0.5 * (b - std::sqrt(disc));
    const double t1 = q / a;
    const double t2 = cc / q;
    t = std::min(t1, t2);
    if (!(t > 0.0)) t = std::max(t1, t2);
  }
  return (t > 0.0 && std::isfinite(t)) ? t : 0.0;
}

SyntheticScene MakeScene(const SceneSpec& spec) {
  if (!(spec.true_scale > 0.0) || !std::isfinite(spec.true_scale)) {
    Degenerate("true scale must be positive and finite");
  }
  if (spec.n_frames < 1) Degenerate("need at least one frame");
  if (spec.n_points == 0) Degenerate("need at least one point");
  if (!(spec.noise_sigma >= 0.0)) Degenerate("noise sigma must be >= 0");
  try {
    spec.intrinsics.Validate();
  } catch (const Error& e) {
    Degenerate(e.what());
  }
  const auto& K = spec.intrinsics;
  if (AnalyticAnchorDepth(spec, K.cx, K.cy) <= 0.0) {
    Degenerate("anchor camera does not face the surface");
  }

  std::mt19937_64 rng(spec.seed);
  SyntheticScene scene;
  scene.spec = spec;
  scene.anchor_name = "keyframe.png";

  CameraToWorld anchor{Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero()};
  if (spec.random_world_frame) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const Eigen::Vector3d axis_angle(unit(rng), unit(rng), unit(rng));
    anchor.rotation = ExpRotation(axis_angle);
    anchor.center = 50.0 * Eigen::Vector3d(unit(rng), unit(rng), unit(rng));
  }

  // Dense analytic anchor depth.
  const ImageSize size{K.width, K.height};
  scene.anchor_depth = DepthMap(size, DepthUnit::kMillimeters);
  std::vector<std::size_t> surface_pixels;
  for (int v = 0; v < size.height; ++v) {
    for (int u = 0; u < size.width; ++u) {
      double d = AnalyticAnchorDepth(spec, u, v);
      if (spec.float32_anchor) d = static_cast<float>(d);
      if (d > 0.0) {
        scene.anchor_depth.at(u, v) = d;
        surface_pixels.push_back(scene.anchor_depth.index(u, v));
      }
    }
  }
  if (surface_pixels.size() < spec.n_points) {
    Degenerate("only " + std::to_string(surface_pixels.size()) +
               " anchor pixels see the surface, need " +
               std::to_string(spec.n_points));
  }

  // Trajectory: frame 0 is the anchor.
  std::vector<CameraToWorld> frames;
  for (int k = 0; k < spec.n_frames; ++k) {
    const Eigen::Matrix3d local_rot = ExpRotation(k * spec.step_rotation);
    const Eigen::Vector3d local_center = k * spec.step_translation;
    frames.push_back({anchor.rotation * local_rot,
                      anchor.rotation * local_center + anchor.center});
  }
  const Eigen::Vector3d surface_center =
      anchor.rotation * Eigen::Vector3d(0.0, 0.0, spec.surface_depth) +
      anchor.center;
  for (int k = 0; k < spec.n_frames; ++k) {
    if (!(frames[k].ToCamera(surface_center).z() > 0.0)) {
      Degenerate("frame " + std::to_string(k) + " does not face the surface");
    }
  }

  // Sparse points sit exactly on the surface behind distinct anchor pixels.
  std::shuffle(surface_pixels.begin(), surface_pixels.end(), rng);
  surface_pixels.resize(spec.n_points);
  std::sort(surface_pixels.begin(), surface_pixels.end());
  std::normal_distribution<double> noise(0.0, 1.0);
  point3d_t next_point_id = 1;
  for (const std::size_t idx : surface_pixels) {
    const int u = static_cast<int>(idx % size.width);
    const int v = static_cast<int>(idx / size.width);
    const double d = scene.anchor_depth[idx];
    const Eigen::Vector3d cam((u - K.cx) * d / K.fx, (v - K.cy) * d / K.fy, d);
    Eigen::Vector3d world = anchor.rotation * cam + anchor.center;
    if (spec.noise_sigma > 0.0) {
      world += spec.noise_sigma *
               Eigen::Vector3d(noise(rng), noise(rng), noise(rng));
    }
    scene.metric_points.emplace(next_point_id++, world);
  }

  // Unscaled model.
  const double s0 = spec.true_scale;
  scene.model.cameras.emplace(K.camera_id, K);
  for (int k = 0; k < spec.n_frames; ++k) {
    const image_t id = k + 1;
    const Eigen::Quaterniond q_c2w(frames[k].rotation);
    scene.metric_poses.emplace(
        id, Pose(q_c2w, frames[k].center, PoseConvention::kCameraToWorld));
    RegisteredImage image;
    image.image_id = id;
    image.name = k == 0 ? scene.anchor_name : FrameName(k);
    image.camera_id = K.camera_id;
    const Eigen::Quaterniond q_w2c = q_c2w.conjugate();
    image.pose = Pose(q_w2c,
                      -(q_w2c.toRotationMatrix() * (frames[k].center / s0)),
                      PoseConvention::kWorldToCamera);
    scene.model.images.emplace(id, std::move(image));
  }
  for (const auto& [pid, world] : scene.metric_points) {
    Point3D p;
    p.point3d_id = pid;
    p.position = world / s0;
    p.color = {static_cast<std::uint8_t>(37 * pid % 256),
               static_cast<std::uint8_t>(91 * pid % 256),
               static_cast<std::uint8_t>(173 * pid % 256)};
    p.reprojection_error = 0.5;
    for (int k = 0; k < spec.n_frames; ++k) {
      const Eigen::Vector3d cam = frames[k].ToCamera(world);
      if (!(cam.z() > 0.0)) continue;
      const double x = K.fx * cam.x() / cam.z() + K.cx;
      const double y = K.fy * cam.y() / cam.z() + K.cy;
      if (x < -0.5 || y < -0.5 || x >= K.width - 0.5 || y >= K.height - 0.5) {
        continue;
      }
      auto& image = scene.model.images.at(k + 1);
      p.track.push_back(
          {image.image_id, static_cast<std::int64_t>(image.observations.size())});
      image.observations.push_back({x, y, pid});
    }
    scene.model.points.emplace(pid, std::move(p));
  }

  for (int k = 0; k < spec.n_frames + spec.n_unregistered; ++k) {
    scene.frame_names.push_back(k == 0 ? scene.anchor_name : FrameName(k));
  }
  return scene;
}

void WriteScene(const SyntheticScene& scene, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  WriteModel(scene.model, dir / "sparse");
  SaveDepth(scene.anchor_depth, dir / "anchor.depth.pfm", DepthFileFormat::kPfm);
  {
    std::ofstream out(dir / "frames.txt");
    if (!out) throw Error(ErrorCode::kIoError, "cannot write frames.txt");
    for (const auto& name : scene.frame_names) out << name << '\n';
  }
  nlohmann::ordered_json truth;
  truth["true_scale"] = scene.spec.true_scale;
  truth["anchor_name"] = scene.anchor_name;
  truth["seed"] = scene.spec.seed;
  truth["surface"] =
      scene.spec.surface == SurfaceKind::kPlane ? "plane" : "sphere_patch";
  truth["n_frames"] = scene.spec.n_frames;
  truth["n_points"] = scene.spec.n_points;
  truth["noise_sigma"] = scene.spec.noise_sigma;
  std::ofstream out(dir / "truth.json");
  if (!out) throw Error(ErrorCode::kIoError, "cannot write truth.json");
  out << truth.dump(2) << '\n';
}

}  // namespace sfmscale
