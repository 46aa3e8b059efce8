#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sfmscale/depth_io.hpp"
#include "sfmscale/error.hpp"
#include "sfmscale/eval_metrics.hpp"
#include "sfmscale/manifest.hpp"
#include "sfmscale/pipeline.hpp"
#include "sfmscale/reprojection.hpp"
#include "sfmscale/scale_recovery.hpp"
#include "sfmscale/sfm_model.hpp"
#include "sfmscale/synthetic.hpp"

namespace py = pybind11;
using namespace sfmscale;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

DepthMap ToDepth(const Array& a, DepthUnit unit) {
  if (a.ndim() != 2) throw py::value_error("depth arrays must be 2-D (height, width)");
  const ImageSize size{static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0))};
  return DepthMap(size, unit, std::vector<double>(a.data(), a.data() + a.size()));
}

Array ToArray(const DepthMap& m) {
  Array out({m.height(), m.width()});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

DepthFileFormat FormatOf(const std::string& name) {
  if (name == "pfm") return DepthFileFormat::kPfm;
  if (name == "png16") return DepthFileFormat::kPng16;
  throw py::value_error("format must be 'pfm' or 'png16'");
}

py::dict ReportDict(const MetricReport& r) {
  py::dict d;
  for (int c = 0; c < kMetricColumnCount; ++c) d[kMetricColumns[c]] = MetricField(r, c);
  d["valid_pixel_count"] = r.valid_pixel_count;
  return d;
}

MetricReport ReportFrom(const py::dict& d) {
  MetricReport r;
  for (int c = 0; c < kMetricColumnCount; ++c) {
    if (d.contains(kMetricColumns[c])) MetricField(r, c) = d[kMetricColumns[c]].cast<double>();
  }
  if (d.contains("valid_pixel_count")) {
    r.valid_pixel_count = d["valid_pixel_count"].cast<std::size_t>();
  }
  return r;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Metric scale recovery and depth reprojection for SfM models";

  static py::exception<Error> error_type(m, "SfmscaleError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error_type)(e.what());
      inst.attr("code") = std::string(e.code_name());
      PyErr_SetObject(error_type.ptr(), inst.ptr());
    }
  });

  py::enum_<PoseConvention>(m, "PoseConvention")
      .value("WORLD_TO_CAMERA", PoseConvention::kWorldToCamera)
      .value("CAMERA_TO_WORLD", PoseConvention::kCameraToWorld);

  py::enum_<CameraModel>(m, "CameraModel")
      .value("SIMPLE_PINHOLE", CameraModel::kSimplePinhole)
      .value("PINHOLE", CameraModel::kPinhole);

  py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
      .def(py::init([](camera_t id, int width, int height, double fx, double fy,
                       double cx, double cy) {
             CameraIntrinsics k{id, CameraModel::kPinhole, width, height, fx, fy, cx, cy};
             k.Validate();
             return k;
           }),
           py::arg("camera_id"), py::arg("width"), py::arg("height"), py::arg("fx"),
           py::arg("fy"), py::arg("cx"), py::arg("cy"))
      .def_readonly("camera_id", &CameraIntrinsics::camera_id)
      .def_readonly("model", &CameraIntrinsics::model)
      .def_readonly("width", &CameraIntrinsics::width)
      .def_readonly("height", &CameraIntrinsics::height)
      .def_readonly("fx", &CameraIntrinsics::fx)
      .def_readonly("fy", &CameraIntrinsics::fy)
      .def_readonly("cx", &CameraIntrinsics::cx)
      .def_readonly("cy", &CameraIntrinsics::cy);

  // Quaternions cross the boundary as (w, x, y, z).
  py::class_<Pose>(m, "Pose")
      .def(py::init([](const Eigen::Vector4d& q, const Eigen::Vector3d& t,
                       PoseConvention conv) {
             return Pose(Eigen::Quaterniond(q[0], q[1], q[2], q[3]).normalized(), t, conv);
           }),
           py::arg("qvec"), py::arg("tvec"),
           py::arg("convention") = PoseConvention::kWorldToCamera)
      .def_property_readonly("qvec",
                             [](const Pose& p) {
                               const auto& q = p.rotation;
                               return Eigen::Vector4d(q.w(), q.x(), q.y(), q.z());
                             })
      .def_readonly("tvec", &Pose::translation)
      .def_readonly("convention", &Pose::convention)
      .def("rotation_matrix", &Pose::RotationMatrix)
      .def("inverted", &Pose::Inverted)
      .def("as_convention", &Pose::As)
      .def("camera_center", [](const Pose& p) { return CameraCenter(p); });

  py::class_<RegisteredImage>(m, "RegisteredImage")
      .def_readonly("image_id", &RegisteredImage::image_id)
      .def_readonly("name", &RegisteredImage::name)
      .def_readonly("camera_id", &RegisteredImage::camera_id)
      .def_readonly("pose", &RegisteredImage::pose)
      .def_property_readonly("num_observations",
                             [](const RegisteredImage& i) { return i.observations.size(); });

  py::class_<SparseModel>(m, "SparseModel")
      .def_readonly("cameras", &SparseModel::cameras)
      .def_readonly("images", &SparseModel::images)
      .def_property_readonly("points",
                             [](const SparseModel& s) {
                               std::map<point3d_t, Eigen::Vector3d> out;
                               for (const auto& [id, p] : s.points) out.emplace(id, p.position);
                               return out;
                             })
      .def("validate", &SparseModel::Validate)
      .def("image_id", [](const SparseModel& s, const std::string& name) -> py::object {
        const RegisteredImage* img = s.FindImageByName(name);
        return img ? py::cast(img->image_id) : py::none();
      });

  m.def("read_model", &ReadModel, py::arg("directory"));
  m.def("write_model", &WriteModel, py::arg("model"), py::arg("directory"));

  m.def(
      "load_depth",
      [](const std::filesystem::path& path) {
        return ToArray(LoadDepth(path, DepthUnit::kMillimeters));
      },
      py::arg("path"), "Load a Pf or 16-bit PNG depth map; invalid pixels are 0.");
  m.def(
      "save_depth",
      [](const Array& depth, const std::filesystem::path& path, const std::string& format) {
        SaveDepth(ToDepth(depth, DepthUnit::kMillimeters), path, FormatOf(format));
      },
      py::arg("depth"), py::arg("path"), py::arg("format") = "pfm");

  py::class_<ScaleResult>(m, "ScaleResult")
      .def_readonly("scale", &ScaleResult::scale)
      .def_readonly("sample_count", &ScaleResult::sample_count)
      .def_readonly("mad", &ScaleResult::ratio_median_abs_deviation)
      .def("__repr__", [](const ScaleResult& r) {
        return "ScaleResult(scale=" + std::to_string(r.scale) +
               ", sample_count=" + std::to_string(r.sample_count) + ")";
      });

  m.def(
      "project_sparse_depth",
      [](const SparseModel& model, image_t image_id, bool tracked_only) {
        return ToArray(ProjectSparseDepth(model, image_id, model.CameraOf(image_id),
                                          {tracked_only}));
      },
      py::arg("model"), py::arg("image_id"), py::arg("tracked_only") = false);
  m.def(
      "recover_scale",
      [](const Array& metric, const Array& unscaled, std::size_t min_samples) {
        return RecoverScale(ToDepth(metric, DepthUnit::kMillimeters),
                            ToDepth(unscaled, DepthUnit::kUnscaled), min_samples);
      },
      py::arg("metric"), py::arg("unscaled"), py::arg("min_samples") = kDefaultMinSamples);
  m.def(
      "metricize_poses",
      [](const SparseModel& model, double scale) {
        return MetricizePoses(model, ScaleResult{scale, 0, 0.0});
      },
      py::arg("model"), py::arg("scale"));
  m.def(
      "metricize_points",
      [](const SparseModel& model, double scale) {
        return MetricizePoints(model, ScaleResult{scale, 0, 0.0});
      },
      py::arg("model"), py::arg("scale"));

  m.def(
      "reproject_depth",
      [](const Array& anchor_depth, const Pose& anchor_pose, const Pose& target_pose,
         const CameraIntrinsics& anchor_k, const CameraIntrinsics& target_k) {
        return ToArray(ReprojectDepth(ToDepth(anchor_depth, DepthUnit::kMillimeters),
                                      anchor_pose, target_pose, anchor_k, target_k));
      },
      py::arg("anchor_depth"), py::arg("anchor_pose"), py::arg("target_pose"),
      py::arg("anchor_intrinsics"), py::arg("target_intrinsics"));

  m.def(
      "depth_from_disparity",
      [](const Array& disparity, double fx, double baseline) {
        return ToArray(DepthFromDisparity(ToDepth(disparity, DepthUnit::kDisparityPixels),
                                          StereoRig{fx, baseline}));
      },
      py::arg("disparity"), py::arg("fx"), py::arg("baseline"));
  m.def(
      "disparity_metrics",
      [](const Array& pred, const Array& gt, double bad_threshold) {
        const auto r = DisparityMetricsOf(ToDepth(pred, DepthUnit::kDisparityPixels),
                                          ToDepth(gt, DepthUnit::kDisparityPixels),
                                          bad_threshold);
        return py::dict(py::arg("epe") = r.epe, py::arg("rmse") = r.rmse,
                        py::arg("bad") = r.bad_percent, py::arg("count") = r.count);
      },
      py::arg("pred"), py::arg("gt"), py::arg("bad_threshold") = kDefaultBadThreshold);
  m.def(
      "depth_metrics",
      [](const Array& pred, const Array& gt, double delta_base) {
        const auto r = DepthMetricsOf(ToDepth(pred, DepthUnit::kMillimeters),
                                      ToDepth(gt, DepthUnit::kMillimeters), delta_base);
        return py::dict(py::arg("abs_rel") = r.abs_rel, py::arg("rmse") = r.rmse,
                        py::arg("mae") = r.mae, py::arg("delta1") = r.delta1_percent,
                        py::arg("count") = r.count);
      },
      py::arg("pred"), py::arg("gt"), py::arg("delta_base") = kDefaultDeltaBase);
  m.def(
      "aggregate",
      [](const std::vector<std::pair<std::string, py::dict>>& rows, bool pixel_weighted) {
        std::vector<SequenceReport> reports;
        for (const auto& [name, d] : rows) reports.emplace_back(name, ReportFrom(d));
        const auto r = Aggregate(std::move(reports), pixel_weighted
                                                         ? AggregationMode::kPixelWeighted
                                                         : AggregationMode::kPerSequenceMean);
        return py::make_tuple(ReportDict(r.mean), ReportDict(r.variance));
      },
      py::arg("rows"), py::arg("pixel_weighted") = false,
      "Rows are (sequence, {column: value}); returns (mean, variance).");

  m.def(
      "split_totals",
      [](const std::map<std::string, std::size_t>& counts) {
        SequenceFrames frames;
        for (const auto& [seq, n] : counts) {
          frames[SequenceId::Parse(seq)] = std::vector<std::string>(n);
        }
        const SplitManifest man = BuildManifest(frames, DefaultSplit());
        return py::dict(py::arg("train") = man.train_total(),
                        py::arg("validation") = man.validation_total(),
                        py::arg("grand_total") = man.grand_total());
      },
      py::arg("frame_counts"), "Totals of the default split for {sequence: n_frames}.");

  m.def(
      "make_scene",
      [](double true_scale, const std::string& surface, int n_frames, std::size_t n_points,
         std::uint64_t seed, int width, int height) {
        SceneSpec spec;
        spec.true_scale = true_scale;
        spec.surface = surface == "sphere" ? SurfaceKind::kSpherePatch : SurfaceKind::kPlane;
        spec.n_frames = n_frames;
        spec.n_points = n_points;
        spec.seed = seed;
        spec.intrinsics.width = width;
        spec.intrinsics.height = height;
        spec.intrinsics.cx = width / 2.0 - 0.7;
        spec.intrinsics.cy = height / 2.0 + 0.6;
        const SyntheticScene s = MakeScene(spec);
        py::dict d;
        d["model"] = s.model;
        d["anchor_depth"] = ToArray(s.anchor_depth);
        d["anchor_id"] = s.anchor_id;
        d["anchor_name"] = s.anchor_name;
        d["metric_poses"] = s.metric_poses;
        d["intrinsics"] = s.spec.intrinsics;
        return d;
      },
      py::arg("true_scale") = 1.0, py::arg("surface") = "plane", py::arg("n_frames") = 5,
      py::arg("n_points") = 200, py::arg("seed") = 0, py::arg("width") = 128,
      py::arg("height") = 128);

  m.def(
      "metricize",
      [](const std::filesystem::path& model_dir, const std::filesystem::path& anchor_depth,
         const std::string& anchor_name, const std::filesystem::path& out_dir,
         std::size_t min_samples, const std::string& format, int jobs) {
        MetricizeOptions o;
        o.model_dir = model_dir;
        o.anchor_depth_path = anchor_depth;
        o.anchor_image_name = anchor_name;
        o.out_dir = out_dir;
        o.min_samples = min_samples;
        o.format = FormatOf(format);
        o.jobs = jobs;
        MetricizeSummary s;
        {
          py::gil_scoped_release unlocked;
          s = RunMetricize(o);
        }
        return py::dict(py::arg("sequence") = s.sequence, py::arg("scale") = s.scale.scale,
                        py::arg("sample_count") = s.scale.sample_count,
                        py::arg("maps") = s.maps_written);
      },
      py::arg("model_dir"), py::arg("anchor_depth"), py::arg("anchor_name"),
      py::arg("out_dir"), py::arg("min_samples") = kDefaultMinSamples,
      py::arg("format") = "pfm", py::arg("jobs") = 1);
}
