#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sfmscale/depth_io.hpp"
#include "sfmscale/error.hpp"
#include "sfmscale/eval_metrics.hpp"
#include "sfmscale/manifest.hpp"
#include "sfmscale/scale_recovery.hpp"

namespace sfmscale {

// Machine-readable failure record: {"code", "message", "sequence"?}.
struct ErrorRecord {
  std::string code;
  std::string message;
  std::optional<std::string> sequence;

  static ErrorRecord From(const Error& e,
                          std::optional<std::string> sequence = std::nullopt);
  std::string ToJson() const;
};

struct MetricizeOptions {
  std::filesystem::path model_dir;
  std::filesystem::path anchor_depth_path;
  std::string anchor_image_name;
  std::filesystem::path out_dir;
  // Defaults to the name of out_dir.
  std::string sequence;
  std::size_t min_samples = kDefaultMinSamples;
  // fx, fy, cx, cy applied to every camera in place of the refined values.
  std::optional<std::array<double, 4>> intrinsics_override;
  bool tracked_only = false;
  DepthFileFormat format = DepthFileFormat::kPfm;
  int jobs = 1;
  // Text file with one frame name per line: the full sequence, used to report
  // frames that were never co-registered.
  std::optional<std::filesystem::path> frame_list;
};

struct MetricizeSummary {
  std::string sequence;
  ScaleResult scale;
  std::size_t maps_written = 0;
  std::vector<std::string> unregistered;
};

// Parses the model, recovers the scale at the anchor, and writes under
// out_dir: scale.json, poses_metric.txt, depth/<image>.depth.{pfm,png} and
// skipped.json. Throws Error on failure (kAnchorNotRegistered if the anchor
// name is not in images.txt).
MetricizeSummary RunMetricize(const MetricizeOptions& options);

struct BatchOutcome {
  std::vector<MetricizeSummary> succeeded;
  std::vector<ErrorRecord> failed;
};

// Runs independent sequences on up to `jobs` threads; failures are collected.
BatchOutcome RunMetricizeBatch(const std::vector<MetricizeOptions>& sequences,
                               int jobs);

// CSV lines `sequence,model_dir,anchor_depth,anchor_name,out_dir`.
std::vector<MetricizeOptions> ReadBatchFile(const std::filesystem::path& path);

enum class EvalInput { kDisparity, kDepth };

struct EvaluateOptions {
  std::filesystem::path pred_dir;
  std::filesystem::path gt_dir;
  std::filesystem::path out_csv;
  EvalInput input = EvalInput::kDisparity;
  std::optional<StereoRig> rig;
  AggregationMode mode = AggregationMode::kPerSequenceMean;
  // Aggregate precomputed per-sequence rows instead of reading maps.
  std::optional<std::filesystem::path> from_csv;
  double bad_threshold = kDefaultBadThreshold;
  double delta_base = kDefaultDeltaBase;
};

struct EvaluateSummary {
  AggregateResult result;
  std::size_t pairs = 0;
  std::vector<std::string> unmatched;
};

// Pairs files by relative path. Files in a subdirectory belong to the
// sequence named by it; top-level files form one sequence named after
// pred_dir. Writes out_csv and out_csv + ".report.json".
EvaluateSummary RunEvaluate(const EvaluateOptions& options);

struct ManifestOptions {
  std::vector<std::filesystem::path> sequence_dirs;
  std::optional<std::filesystem::path> split_file;
  std::filesystem::path out_dir;
};

// Each sequence directory is named `<dataset>_<keyframe>` and holds the
// metricize output; frames are the depth maps found under depth/ (or the
// directory itself). Writes manifest.csv and summary.json.
SplitManifest RunManifest(const ManifestOptions& options);

}  // namespace sfmscale
