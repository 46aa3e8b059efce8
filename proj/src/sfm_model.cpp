#include "sfmscale/sfm_model.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "sfmscale/error.hpp"
#include "text_util.hpp"

namespace sfmscale {
namespace {

using detail::FormatDouble;
using detail::ParseNumber;
using detail::SplitWhitespace;

constexpr int kRoundTripDigits = 17;
constexpr double kQuaternionRejectTolerance = 1e-3;
constexpr double kQuaternionKeepTolerance = 1e-12;

[[noreturn]] void ThrowMalformed(const char* file, int line_no,
                                 const std::string& what) {
  std::ostringstream msg;
  msg << file << ":" << line_no << ": " << what;
  throw Error(ErrorCode::kMalformedLine, msg.str());
}

template <typename T>
T ParseField(std::string_view token, const char* file, int line_no,
             const char* field) {
  const auto v = ParseNumber<T>(token);
  if (!v) {
    ThrowMalformed(file, line_no,
                   std::string("invalid ") + field + " '" +
                       std::string(token) + "'");
  }
  return *v;
}

Eigen::Quaterniond NormalizeLoaded(Eigen::Quaterniond q, const char* file,
                                   int line_no) {
  const double norm = q.norm();
  if (!std::isfinite(norm) ||
      std::abs(norm - 1.0) > kQuaternionRejectTolerance) {
    ThrowMalformed(file, line_no,
                   "quaternion norm " + FormatDouble(norm, 6) +
                       " deviates from 1 by more than 1e-3");
  }
  // Leave already-unit quaternions untouched so that write/read is lossless.
  if (std::abs(norm - 1.0) > kQuaternionKeepTolerance) q.normalize();
  return q;
}

std::string_view CameraModelName(CameraModel model) {
  return model == CameraModel::kPinhole ? "PINHOLE" : "SIMPLE_PINHOLE";
}

}  // namespace

void CameraIntrinsics::Validate() const {
  const auto fail = [this](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument,
                "camera " + std::to_string(camera_id) + ": " + what);
  };
  if (width <= 0 || height <= 0) fail("non-positive image size");
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
    fail("focal length must be positive and finite");
  }
  if (!std::isfinite(cx) || !std::isfinite(cy)) {
    fail("principal point must be finite");
  }
  if (model == CameraModel::kSimplePinhole && fx != fy) {
    fail("SIMPLE_PINHOLE requires fx == fy");
  }
}

Pose Pose::Inverted() const {
  const Eigen::Quaterniond inv = rotation.conjugate();
  const Eigen::Vector3d t = -(inv.toRotationMatrix() * translation);
  return Pose(inv, t,
              convention == PoseConvention::kWorldToCamera
                  ? PoseConvention::kCameraToWorld
                  : PoseConvention::kWorldToCamera);
}

Pose Pose::As(PoseConvention target) const {
  return convention == target ? *this : Inverted();
}

bool BitwiseEqual(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  return a.w() == b.w() && a.x() == b.x() && a.y() == b.y() && a.z() == b.z();
}

bool operator==(const Pose& a, const Pose& b) {
  return a.convention == b.convention && BitwiseEqual(a.rotation, b.rotation) &&
         a.translation == b.translation;
}

Eigen::Vector3d CameraCenter(const Pose& pose) {
  if (pose.convention == PoseConvention::kCameraToWorld) {
    return pose.translation;
  }
  return pose.Inverted().translation;
}

void SparseModel::Validate() const {
  const auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kReferentialIntegrity, what);
  };
  for (const auto& [id, image] : images) {
    if (!cameras.count(image.camera_id)) {
      fail("image " + std::to_string(id) + " references missing camera " +
           std::to_string(image.camera_id));
    }
    for (const auto& obs : image.observations) {
      if (obs.point3d_id && !points.count(*obs.point3d_id)) {
        fail("image " + std::to_string(id) + " observes missing point " +
             std::to_string(*obs.point3d_id));
      }
    }
  }
  for (const auto& [id, point] : points) {
    for (const auto& el : point.track) {
      const auto it = images.find(el.image_id);
      if (it == images.end()) {
        fail("point " + std::to_string(id) + " tracks missing image " +
             std::to_string(el.image_id));
      }
      if (el.point2d_idx < 0 ||
          el.point2d_idx >=
              static_cast<std::int64_t>(it->second.observations.size())) {
        fail("point " + std::to_string(id) + " track index " +
             std::to_string(el.point2d_idx) + " out of range for image " +
             std::to_string(el.image_id));
      }
    }
  }
}

const RegisteredImage* SparseModel::FindImageByName(
    const std::string& name) const {
  for (const auto& [id, image] : images) {
    if (image.name == name) return &image;
  }
  return nullptr;
}

const CameraIntrinsics& SparseModel::CameraOf(image_t image_id) const {
  const auto it = images.find(image_id);
  if (it == images.end()) {
    throw Error(ErrorCode::kImageNotRegistered,
                "image " + std::to_string(image_id) + " is not registered");
  }
  return cameras.at(it->second.camera_id);
}

std::map<camera_t, CameraIntrinsics> ParseCameras(std::istream& stream) {
  constexpr const char* kFile = "cameras.txt";
  std::map<camera_t, CameraIntrinsics> cameras;
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (detail::IsCommentOrBlank(line)) continue;
    const auto tok = SplitWhitespace(line);
    if (tok.size() < 4) ThrowMalformed(kFile, line_no, "too few fields");

    CameraIntrinsics cam;
    cam.camera_id = ParseField<camera_t>(tok[0], kFile, line_no, "CAMERA_ID");
    std::size_t num_params = 0;
    if (tok[1] == "PINHOLE") {
      cam.model = CameraModel::kPinhole;
      num_params = 4;
    } else if (tok[1] == "SIMPLE_PINHOLE") {
      cam.model = CameraModel::kSimplePinhole;
      num_params = 3;
    } else {
      throw Error(ErrorCode::kUnsupportedCameraModel,
                  std::string(kFile) + ":" + std::to_string(line_no) +
                      ": camera model '" + std::string(tok[1]) +
                      "' implies lens distortion; only PINHOLE and "
                      "SIMPLE_PINHOLE are supported");
    }
    if (tok.size() != 4 + num_params) {
      ThrowMalformed(kFile, line_no,
                     "expected " + std::to_string(4 + num_params) +
                         " fields, got " + std::to_string(tok.size()));
    }
    cam.width = ParseField<int>(tok[2], kFile, line_no, "WIDTH");
    cam.height = ParseField<int>(tok[3], kFile, line_no, "HEIGHT");
    std::vector<double> params;
    for (std::size_t i = 4; i < tok.size(); ++i) {
      params.push_back(ParseField<double>(tok[i], kFile, line_no, "PARAM"));
    }
    if (cam.model == CameraModel::kPinhole) {
      cam.fx = params[0];
      cam.fy = params[1];
      cam.cx = params[2];
      cam.cy = params[3];
    } else {
      cam.fx = cam.fy = params[0];
      cam.cx = params[1];
      cam.cy = params[2];
    }
    try {
      cam.Validate();
    } catch (const Error& e) {
      ThrowMalformed(kFile, line_no, e.what());
    }
    if (!cameras.emplace(cam.camera_id, cam).second) {
      ThrowMalformed(kFile, line_no,
                     "duplicate CAMERA_ID " + std::to_string(cam.camera_id));
    }
  }
  return cameras;
}

std::map<image_t, RegisteredImage> ParseImages(std::istream& stream) {
  constexpr const char* kFile = "images.txt";
  std::map<image_t, RegisteredImage> images;
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (detail::IsCommentOrBlank(line)) continue;
    const auto tok = SplitWhitespace(line);
    if (tok.size() != 10) {
      ThrowMalformed(kFile, line_no,
                     "image header needs 10 fields, got " +
                         std::to_string(tok.size()));
    }
    RegisteredImage image;
    image.image_id = ParseField<image_t>(tok[0], kFile, line_no, "IMAGE_ID");
    const double qw = ParseField<double>(tok[1], kFile, line_no, "QW");
    const double qx = ParseField<double>(tok[2], kFile, line_no, "QX");
    const double qy = ParseField<double>(tok[3], kFile, line_no, "QY");
    const double qz = ParseField<double>(tok[4], kFile, line_no, "QZ");
    Eigen::Vector3d t;
    t.x() = ParseField<double>(tok[5], kFile, line_no, "TX");
    t.y() = ParseField<double>(tok[6], kFile, line_no, "TY");
    t.z() = ParseField<double>(tok[7], kFile, line_no, "TZ");
    if (!t.allFinite()) ThrowMalformed(kFile, line_no, "non-finite translation");
    image.pose = Pose(NormalizeLoaded(Eigen::Quaterniond(qw, qx, qy, qz), kFile,
                                      line_no),
                      t, PoseConvention::kWorldToCamera);
    image.camera_id = ParseField<camera_t>(tok[8], kFile, line_no, "CAMERA_ID");
    image.name = std::string(tok[9]);

    // The observation line is positional: read it raw, even when blank.
    std::string obs_line;
    if (std::getline(stream, obs_line)) {
      ++line_no;
      const auto obs = SplitWhitespace(obs_line);
      if (obs.size() % 3 != 0) {
        throw Error(ErrorCode::kOddObservationTriples,
                    std::string(kFile) + ":" + std::to_string(line_no) + ": " +
                        std::to_string(obs.size()) +
                        " tokens is not a multiple of 3");
      }
      image.observations.reserve(obs.size() / 3);
      for (std::size_t i = 0; i < obs.size(); i += 3) {
        Observation o;
        o.x = ParseField<double>(obs[i], kFile, line_no, "X");
        o.y = ParseField<double>(obs[i + 1], kFile, line_no, "Y");
        const auto pid =
            ParseField<point3d_t>(obs[i + 2], kFile, line_no, "POINT3D_ID");
        if (pid >= 0) {
          o.point3d_id = pid;
        } else if (pid != -1) {
          ThrowMalformed(kFile, line_no, "negative POINT3D_ID other than -1");
        }
        image.observations.push_back(o);
      }
    }
    const image_t id = image.image_id;
    if (!images.emplace(id, std::move(image)).second) {
      ThrowMalformed(kFile, line_no, "duplicate IMAGE_ID " + std::to_string(id));
    }
  }
  return images;
}

std::map<point3d_t, Point3D> ParsePoints3D(std::istream& stream) {
  constexpr const char* kFile = "points3D.txt";
  std::map<point3d_t, Point3D> points;
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (detail::IsCommentOrBlank(line)) continue;
    const auto tok = SplitWhitespace(line);
    if (tok.size() < 8) ThrowMalformed(kFile, line_no, "too few fields");
    if ((tok.size() - 8) % 2 != 0) {
      throw Error(ErrorCode::kOddTrackPairs,
                  std::string(kFile) + ":" + std::to_string(line_no) +
                      ": track list has odd length " +
                      std::to_string(tok.size() - 8));
    }
    Point3D p;
    p.point3d_id = ParseField<point3d_t>(tok[0], kFile, line_no, "POINT3D_ID");
    p.position.x() = ParseField<double>(tok[1], kFile, line_no, "X");
    p.position.y() = ParseField<double>(tok[2], kFile, line_no, "Y");
    p.position.z() = ParseField<double>(tok[3], kFile, line_no, "Z");
    if (!p.position.allFinite()) {
      ThrowMalformed(kFile, line_no, "non-finite position");
    }
    for (int c = 0; c < 3; ++c) {
      const int v = ParseField<int>(tok[4 + c], kFile, line_no, "RGB");
      if (v < 0 || v > 255) ThrowMalformed(kFile, line_no, "color out of range");
      p.color[c] = static_cast<std::uint8_t>(v);
    }
    p.reprojection_error = ParseField<double>(tok[7], kFile, line_no, "ERROR");
    for (std::size_t i = 8; i < tok.size(); i += 2) {
      TrackElement el;
      el.image_id = ParseField<image_t>(tok[i], kFile, line_no, "IMAGE_ID");
      el.point2d_idx =
          ParseField<std::int64_t>(tok[i + 1], kFile, line_no, "POINT2D_IDX");
      p.track.push_back(el);
    }
    const point3d_t id = p.point3d_id;
    if (!points.emplace(id, std::move(p)).second) {
      ThrowMalformed(kFile, line_no, "duplicate POINT3D_ID " + std::to_string(id));
    }
  }
  return points;
}

namespace {

std::ifstream OpenForRead(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  return in;
}

std::ofstream OpenForWrite(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  }
  return out;
}

}  // namespace

SparseModel ReadModel(const std::filesystem::path& dir) {
  SparseModel model;
  {
    auto in = OpenForRead(dir / "cameras.txt");
    model.cameras = ParseCameras(in);
  }
  {
    auto in = OpenForRead(dir / "images.txt");
    model.images = ParseImages(in);
  }
  {
    auto in = OpenForRead(dir / "points3D.txt");
    model.points = ParsePoints3D(in);
  }
  model.Validate();
  return model;
}

void WriteCameras(std::ostream& out,
                  const std::map<camera_t, CameraIntrinsics>& cameras) {
  out << "# Camera list with one line of data per camera:\n"
      << "#   CAMERA_ID, MODEL, WIDTH, HEIGHT, PARAMS[]\n"
      << "# Number of cameras: " << cameras.size() << "\n";
  for (const auto& [id, cam] : cameras) {
    out << id << ' ' << CameraModelName(cam.model) << ' ' << cam.width << ' '
        << cam.height << ' ' << FormatDouble(cam.fx, kRoundTripDigits);
    if (cam.model == CameraModel::kPinhole) {
      out << ' ' << FormatDouble(cam.fy, kRoundTripDigits);
    }
    out << ' ' << FormatDouble(cam.cx, kRoundTripDigits) << ' '
        << FormatDouble(cam.cy, kRoundTripDigits) << '\n';
  }
}

void WriteImages(std::ostream& out,
                 const std::map<image_t, RegisteredImage>& images) {
  out << "# Image list with two lines of data per image:\n"
      << "#   IMAGE_ID, QW, QX, QY, QZ, TX, TY, TZ, CAMERA_ID, NAME\n"
      << "#   POINTS2D[] as (X, Y, POINT3D_ID)\n"
      << "# Number of images: " << images.size() << "\n";
  for (const auto& [id, image] : images) {
    const Pose pose = image.pose.As(PoseConvention::kWorldToCamera);
    const auto& q = pose.rotation;
    const auto& t = pose.translation;
    out << id;
    for (double v : {q.w(), q.x(), q.y(), q.z(), t.x(), t.y(), t.z()}) {
      out << ' ' << FormatDouble(v, kRoundTripDigits);
    }
    out << ' ' << image.camera_id << ' ' << image.name << '\n';
    bool first = true;
    for (const auto& obs : image.observations) {
      if (!first) out << ' ';
      first = false;
      out << FormatDouble(obs.x, kRoundTripDigits) << ' '
          << FormatDouble(obs.y, kRoundTripDigits) << ' '
          << (obs.point3d_id ? *obs.point3d_id : -1);
    }
    out << '\n';
  }
}

void WritePoints3D(std::ostream& out,
                   const std::map<point3d_t, Point3D>& points) {
  out << "# 3D point list with one line of data per point:\n"
      << "#   POINT3D_ID, X, Y, Z, R, G, B, ERROR, TRACK[] as (IMAGE_ID, "
         "POINT2D_IDX)\n"
      << "# Number of points: " << points.size() << "\n";
  for (const auto& [id, p] : points) {
    out << id << ' ' << FormatDouble(p.position.x(), kRoundTripDigits) << ' '
        << FormatDouble(p.position.y(), kRoundTripDigits) << ' '
        << FormatDouble(p.position.z(), kRoundTripDigits) << ' '
        << int(p.color[0]) << ' ' << int(p.color[1]) << ' ' << int(p.color[2])
        << ' ' << FormatDouble(p.reprojection_error, kRoundTripDigits);
    for (const auto& el : p.track) {
      out << ' ' << el.image_id << ' ' << el.point2d_idx;
    }
    out << '\n';
  }
}

void WriteModel(const SparseModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = OpenForWrite(dir / "cameras.txt");
    WriteCameras(out, model.cameras);
  }
  {
    auto out = OpenForWrite(dir / "images.txt");
    WriteImages(out, model.images);
  }
  {
    auto out = OpenForWrite(dir / "points3D.txt");
    WritePoints3D(out, model.points);
  }
}

}  // namespace sfmscale
