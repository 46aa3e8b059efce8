#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace sfmscale {

using image_t = std::int64_t;
using camera_t = std::int64_t;
using point3d_t = std::int64_t;

enum class CameraModel { kSimplePinhole, kPinhole };

struct CameraIntrinsics {
  camera_t camera_id = 0;
  CameraModel model = CameraModel::kPinhole;
  int width = 0;
  int height = 0;
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  // Throws kInvalidArgument when dimensions/focal lengths are not positive,
  // the principal point is not finite, or SIMPLE_PINHOLE has fx != fy.
  void Validate() const;

  bool operator==(const CameraIntrinsics&) const = default;
};

enum class PoseConvention { kWorldToCamera, kCameraToWorld };

// Rigid transform with an explicit direction. COLMAP stores
// WORLD_TO_CAMERA (x_cam = R x_world + t); CAMERA_TO_WORLD carries the camera
// center as its translation.
struct Pose {
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  PoseConvention convention = PoseConvention::kWorldToCamera;

  Pose() = default;
  Pose(const Eigen::Quaterniond& q, const Eigen::Vector3d& t,
       PoseConvention conv)
      : rotation(q), translation(t), convention(conv) {}

  // Inverse transform, tagged with the opposite convention.
  Pose Inverted() const;
  // Returns *this if already in `target`, otherwise Inverted().
  Pose As(PoseConvention target) const;

  Eigen::Matrix3d RotationMatrix() const { return rotation.toRotationMatrix(); }
  Eigen::Vector3d Apply(const Eigen::Vector3d& p) const {
    return RotationMatrix() * p + translation;
  }
};

bool BitwiseEqual(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);
bool operator==(const Pose& a, const Pose& b);

Eigen::Vector3d CameraCenter(const Pose& pose);

struct Observation {
  double x = 0.0;
  double y = 0.0;
  std::optional<point3d_t> point3d_id;

  bool operator==(const Observation&) const = default;
};

struct RegisteredImage {
  image_t image_id = 0;
  std::string name;
  Pose pose;  // WORLD_TO_CAMERA as stored
  camera_t camera_id = 0;
  std::vector<Observation> observations;

  bool operator==(const RegisteredImage&) const = default;
};

struct TrackElement {
  image_t image_id = 0;
  std::int64_t point2d_idx = 0;

  bool operator==(const TrackElement&) const = default;
};

struct Point3D {
  point3d_t point3d_id = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  std::array<std::uint8_t, 3> color{};
  double reprojection_error = 0.0;
  std::vector<TrackElement> track;

  bool operator==(const Point3D&) const = default;
};

struct SparseModel {
  std::map<camera_t, CameraIntrinsics> cameras;
  std::map<image_t, RegisteredImage> images;
  std::map<point3d_t, Point3D> points;

  // Cross-map referential integrity; throws kReferentialIntegrity.
  void Validate() const;

  const RegisteredImage* FindImageByName(const std::string& name) const;
  const CameraIntrinsics& CameraOf(image_t image_id) const;

  bool operator==(const SparseModel&) const = default;
};

// Text-format parsers. `#` lines and blank lines are skipped, except the
// observation line that follows each image header, which is read verbatim
// and may be empty.
std::map<camera_t, CameraIntrinsics> ParseCameras(std::istream& stream);
std::map<image_t, RegisteredImage> ParseImages(std::istream& stream);
std::map<point3d_t, Point3D> ParsePoints3D(std::istream& stream);

// Reads cameras.txt / images.txt / points3D.txt from `dir` and validates.
SparseModel ReadModel(const std::filesystem::path& dir);

// Writers print doubles with 17 significant digits so that parsing the output
// reproduces the model exactly.
void WriteCameras(std::ostream& stream,
                  const std::map<camera_t, CameraIntrinsics>& cameras);
void WriteImages(std::ostream& stream,
                 const std::map<image_t, RegisteredImage>& images);
void WritePoints3D(std::ostream& stream,
                   const std::map<point3d_t, Point3D>& points);
void WriteModel(const SparseModel& model, const std::filesystem::path& dir);

}  // namespace sfmscale
