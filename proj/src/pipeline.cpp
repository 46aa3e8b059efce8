#include "sfmscale/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "sfmscale/reprojection.hpp"
#include "sfmscale/sfm_model.hpp"
#include "text_util.hpp"

namespace sfmscale {
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kPoseDigits = 12;

// Rounds to 12 significant digits so that the JSON text is stable.
double Rounded(double v) {
  return std::stod(detail::FormatDouble(v, kPoseDigits));
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "short write " + path.string());
}

std::string DefaultSequenceName(const fs::path& out_dir) {
  fs::path p = out_dir.lexically_normal();
  if (p.filename().empty()) p = p.parent_path();
  return p.filename().string();
}

std::vector<std::string> ReadLines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (detail::IsCommentOrBlank(line)) continue;
    lines.emplace_back(detail::Trim(line));
  }
  return lines;
}

const char* DepthSuffix(DepthFileFormat format) {
  return format == DepthFileFormat::kPfm ? ".depth.pfm" : ".depth.png";
}

}  // namespace

ErrorRecord ErrorRecord::From(const Error& e,
                              std::optional<std::string> sequence) {
  return {std::string(e.code_name()), e.what(), std::move(sequence)};
}

std::string ErrorRecord::ToJson() const {
  ordered_json j{{"code", code}, {"message", message}};
  if (sequence) j["sequence"] = *sequence;
  return j.dump();
}

MetricizeSummary RunMetricize(const MetricizeOptions& options) {
  MetricizeSummary summary;
  summary.sequence = options.sequence.empty()
                         ? DefaultSequenceName(options.out_dir)
                         : options.sequence;

  SparseModel model = ReadModel(options.model_dir);
  if (options.intrinsics_override) {
    const auto& [fx, fy, cx, cy] = *options.intrinsics_override;
    for (auto& [id, cam] : model.cameras) {
      cam.model = fx == fy ? cam.model : CameraModel::kPinhole;
      cam.fx = fx;
      cam.fy = fy;
      cam.cx = cx;
      cam.cy = cy;
      cam.Validate();
    }
  }

  const RegisteredImage* anchor = model.FindImageByName(options.anchor_image_name);
  if (anchor == nullptr) {
    throw Error(ErrorCode::kAnchorNotRegistered,
                "anchor image '" + options.anchor_image_name +
                    "' is not registered in " +
                    (options.model_dir / "images.txt").string());
  }
  const CameraIntrinsics& anchor_cam = model.cameras.at(anchor->camera_id);
  const DepthMap anchor_depth =
      LoadDepth(options.anchor_depth_path, DepthUnit::kMillimeters,
                ImageSize{anchor_cam.width, anchor_cam.height});

  const DepthMap sparse = ProjectSparseDepth(
      model, anchor->image_id, anchor_cam, {options.tracked_only});
  summary.scale = RecoverScale(anchor_depth, sparse, options.min_samples);

  SequenceReprojectionInput job;
  job.anchor_depth = &anchor_depth;
  job.anchor_id = anchor->image_id;
  job.metric_poses = MetricizePoses(model, summary.scale);
  for (const auto& [id, image] : model.images) {
    job.intrinsics.emplace(id, model.cameras.at(image.camera_id));
  }
  const SequenceReprojection warped = ReprojectSequence(job, options.jobs);

  if (options.frame_list) {
    for (const auto& name : ReadLines(*options.frame_list)) {
      if (model.FindImageByName(name) == nullptr) {
        summary.unregistered.push_back(name);
      }
    }
  }

  fs::create_directories(options.out_dir / "depth");
  for (const auto& [id, map] : warped.depths) {
    SaveDepth(map,
              options.out_dir / "depth" /
                  (model.images.at(id).name + DepthSuffix(options.format)),
              options.format);
    ++summary.maps_written;
  }

  std::string poses =
      "# Metric camera-to-world poses (translation = camera center, mm)\n"
      "# IMAGE_ID QW QX QY QZ TX TY TZ NAME\n";
  for (const auto& [id, pose] : job.metric_poses) {
    const auto& q = pose.rotation;
    const auto& t = pose.translation;
    poses += std::to_string(id);
    for (double v : {q.w(), q.x(), q.y(), q.z(), t.x(), t.y(), t.z()}) {
      poses += ' ' + detail::FormatDouble(v, kPoseDigits);
    }
    poses += ' ' + model.images.at(id).name + '\n';
  }
  WriteText(options.out_dir / "poses_metric.txt", poses);

  ordered_json scale{{"sequence", summary.sequence},
                     {"scale", Rounded(summary.scale.scale)},
                     {"sample_count", summary.scale.sample_count},
                     {"mad", Rounded(summary.scale.ratio_median_abs_deviation)},
                     {"anchor_name", options.anchor_image_name}};
  WriteText(options.out_dir / "scale.json", scale.dump(2) + "\n");

  ordered_json skipped{{"sequence", summary.sequence},
                       {"unregistered", summary.unregistered}};
  WriteText(options.out_dir / "skipped.json", skipped.dump(2) + "\n");
  return summary;
}

BatchOutcome RunMetricizeBatch(const std::vector<MetricizeOptions>& sequences,
                               int jobs) {
  std::vector<std::optional<MetricizeSummary>> ok(sequences.size());
  std::vector<std::optional<ErrorRecord>> bad(sequences.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < sequences.size(); k = next++) {
      const auto& opt = sequences[k];
      const std::string name = opt.sequence.empty()
                                   ? DefaultSequenceName(opt.out_dir)
                                   : opt.sequence;
      try {
        ok[k] = RunMetricize(opt);
      } catch (const Error& e) {
        bad[k] = ErrorRecord::From(e, name);
      } catch (const std::exception& e) {
        bad[k] = ErrorRecord{"InternalError", e.what(), name};
      }
    }
  };
  const int threads = std::clamp<int>(
      jobs, 1, std::max<int>(1, static_cast<int>(sequences.size())));
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  BatchOutcome out;
  for (std::size_t k = 0; k < sequences.size(); ++k) {
    if (ok[k]) out.succeeded.push_back(std::move(*ok[k]));
    if (bad[k]) out.failed.push_back(std::move(*bad[k]));
  }
  return out;
}

std::vector<MetricizeOptions> ReadBatchFile(const fs::path& path) {
  std::vector<MetricizeOptions> out;
  for (const auto& line : ReadLines(path)) {
    const auto cells = detail::SplitChar(line, ',');
    if (cells.size() != 5) {
      throw Error(ErrorCode::kMalformedLine,
                  path.string() + ": expected sequence,model_dir,anchor_depth,"
                                  "anchor_name,out_dir");
    }
    if (cells[0] == "sequence") continue;
    MetricizeOptions opt;
    opt.sequence = std::string(cells[0]);
    opt.model_dir = std::string(cells[1]);
    opt.anchor_depth_path = std::string(cells[2]);
    opt.anchor_image_name = std::string(cells[3]);
    opt.out_dir = std::string(cells[4]);
    out.push_back(std::move(opt));
  }
  return out;
}

namespace {

bool IsDepthFile(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".pfm" || ext == ".png";
}

// Relative paths of map files under `root`, sorted.
std::set<std::string> ListMaps(const fs::path& root) {
  if (!fs::is_directory(root)) {
    throw Error(ErrorCode::kIoError, root.string() + " is not a directory");
  }
  std::set<std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && IsDepthFile(entry.path())) {
      out.insert(fs::relative(entry.path(), root).generic_string());
    }
  }
  return out;
}

MetricReport MeanOf(const std::vector<MetricReport>& reports,
                    AggregationMode mode) {
  std::vector<SequenceReport> rows;
  for (const auto& r : reports) rows.emplace_back("", r);
  return Aggregate(std::move(rows), mode).mean;
}

}  // namespace

EvaluateSummary RunEvaluate(const EvaluateOptions& options) {
  EvaluateSummary summary;
  std::vector<SequenceReport> rows;

  if (options.from_csv) {
    std::ifstream in(*options.from_csv);
    if (!in) {
      throw Error(ErrorCode::kIoError, "cannot open " + options.from_csv->string());
    }
    rows = ReadMetricsCsv(in);
  } else {
    if (options.input == EvalInput::kDisparity && !options.rig) {
      throw Error(ErrorCode::kInvalidArgument,
                  "--rig fx,baseline is required for disparity input");
    }
    if (options.rig) options.rig->Validate();
    const auto pred = ListMaps(options.pred_dir);
    const auto gt = ListMaps(options.gt_dir);
    for (const auto& rel : pred) {
      if (!gt.count(rel)) summary.unmatched.push_back("pred/" + rel);
    }
    for (const auto& rel : gt) {
      if (!pred.count(rel)) summary.unmatched.push_back("gt/" + rel);
    }
    for (const auto& name : summary.unmatched) {
      std::cerr << "warning: no counterpart for " << name << ", excluded\n";
    }

    const std::string flat_name = DefaultSequenceName(options.pred_dir);
    std::map<std::string, std::vector<MetricReport>> per_sequence;
    const DepthUnit unit = options.input == EvalInput::kDisparity
                               ? DepthUnit::kDisparityPixels
                               : DepthUnit::kMillimeters;
    for (const auto& rel : pred) {
      if (!gt.count(rel)) continue;
      const DepthMap p = LoadDepth(options.pred_dir / rel, unit);
      const DepthMap g = LoadDepth(options.gt_dir / rel, unit, p.size());
      constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
      DisparityMetrics disp{kNaN, kNaN, kNaN, 0};
      DepthMetrics depth;
      if (options.input == EvalInput::kDisparity) {
        disp = DisparityMetricsOf(p, g, options.bad_threshold);
        depth = DepthMetricsOf(DepthFromDisparity(p, *options.rig),
                               DepthFromDisparity(g, *options.rig),
                               options.delta_base);
      } else {
        depth = DepthMetricsOf(p, g, options.delta_base);
        if (options.rig) {
          disp = DisparityMetricsOf(DisparityFromDepth(p, *options.rig),
                                    DisparityFromDepth(g, *options.rig),
                                    options.bad_threshold);
        }
      }
      const auto slash = rel.find('/');
      const std::string seq =
          slash == std::string::npos ? flat_name : rel.substr(0, slash);
      per_sequence[seq].push_back(MetricReport::From(disp, depth));
      ++summary.pairs;
    }
    for (const auto& [seq, reports] : per_sequence) {
      rows.emplace_back(seq, MeanOf(reports, options.mode));
    }
  }

  summary.result = Aggregate(std::move(rows), options.mode);
  if (options.out_csv.has_parent_path()) {
    fs::create_directories(options.out_csv.parent_path());
  }
  {
    std::ofstream out(options.out_csv, std::ios::binary);
    if (!out) {
      throw Error(ErrorCode::kIoError, "cannot write " + options.out_csv.string());
    }
    WriteMetricsCsv(out, summary.result);
  }
  ordered_json report{
      {"pairs", summary.pairs},
      {"sequences", summary.result.rows.size()},
      {"aggregation", options.mode == AggregationMode::kPixelWeighted
                          ? "pixel_weighted"
                          : "per_sequence_mean"},
      {"unmatched", summary.unmatched}};
  WriteText(fs::path(options.out_csv.string() + ".report.json"),
            report.dump(2) + "\n");
  return summary;
}

SplitManifest RunManifest(const ManifestOptions& options) {
  SequenceFrames frames;
  std::map<SequenceId, std::string> anchors;
  for (const auto& dir : options.sequence_dirs) {
    const SequenceId id = SequenceId::Parse(DefaultSequenceName(dir));
    const fs::path maps = fs::is_directory(dir / "depth") ? dir / "depth" : dir;
    if (!fs::is_directory(maps)) {
      throw Error(ErrorCode::kIoError, maps.string() + " is not a directory");
    }
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(maps)) {
      if (!entry.is_regular_file()) continue;
      const std::string file = entry.path().filename().string();
      for (const char* suffix : {".depth.pfm", ".depth.png"}) {
        const std::string s = suffix;
        if (file.size() > s.size() &&
            file.compare(file.size() - s.size(), s.size(), s) == 0) {
          names.push_back(file.substr(0, file.size() - s.size()));
        }
      }
    }
    std::sort(names.begin(), names.end());
    auto& slot = frames[id];
    slot.insert(slot.end(), names.begin(), names.end());
    if (fs::exists(dir / "scale.json")) {
      std::ifstream in(dir / "scale.json");
      const auto j = nlohmann::json::parse(in, nullptr, false);
      if (j.is_object() && j.contains("anchor_name")) {
        anchors[id] = j["anchor_name"].get<std::string>();
      }
    }
  }

  SplitAssignment assignment = DefaultSplit();
  if (options.split_file) {
    std::ifstream in(*options.split_file);
    if (!in) {
      throw Error(ErrorCode::kIoError,
                  "cannot open " + options.split_file->string());
    }
    assignment = ReadSplitAssignment(in);
  }
  const SplitManifest manifest = BuildManifest(frames, assignment, anchors);

  fs::create_directories(options.out_dir);
  {
    std::ofstream out(options.out_dir / "manifest.csv", std::ios::binary);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write manifest.csv");
    WriteManifestCsv(out, manifest);
  }
  WriteText(options.out_dir / "summary.json", ManifestSummaryJson(manifest));
  return manifest;
}

}  // namespace sfmscale
