// Command-line front end: metricize, evaluate, manifest, synth.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sfmscale/pipeline.hpp"
#include "sfmscale/synthetic.hpp"

namespace fs = std::filesystem;
using namespace sfmscale;

namespace {

// Emits the error record on stdout and, when possible, as error.json.
int Fail(const ErrorRecord& record,
         const std::optional<fs::path>& out_dir = std::nullopt) {
  std::cout << record.ToJson() << std::endl;
  if (out_dir) {
    std::error_code ec;
    fs::create_directories(*out_dir, ec);
    std::ofstream out(*out_dir / "error.json");
    if (out) out << record.ToJson() << '\n';
  }
  return 1;
}

std::vector<double> SplitNumbers(const std::string& text, std::size_t count,
                                 const char* flag) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string cell =
        text.substr(start, comma == std::string::npos ? std::string::npos
                                                      : comma - start);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(flag) + ": '" + cell + "' is not a number");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.size() != count) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(flag) + " expects " + std::to_string(count) +
                    " comma-separated values");
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metric scale recovery and RGB-D reprojection for SfM models"};
  app.require_subcommand(1);

  // metricize
  auto* metricize = app.add_subcommand(
      "metricize", "Scale an SfM model to millimeters and reproject the anchor depth");
  MetricizeOptions mopt;
  std::string override_text, format_text = "pfm";
  std::string batch_file, frame_list;
  metricize->add_option("--model", mopt.model_dir,
                        "Directory with cameras.txt, images.txt, points3D.txt");
  metricize->add_option("--anchor-depth", mopt.anchor_depth_path,
                        "Metric depth map of the keyframe (Pf or 16-bit PNG)");
  metricize->add_option("--anchor-name", mopt.anchor_image_name,
                        "Image name of the keyframe in images.txt");
  metricize->add_option("--out", mopt.out_dir, "Output directory");
  metricize->add_option("--sequence", mopt.sequence,
                        "Sequence name (default: output directory name)");
  metricize->add_option("--min-samples", mopt.min_samples,
                        "Minimum common valid pixels for the scale median")
      ->capture_default_str();
  metricize->add_option("--intrinsics-override", override_text,
                        "fx,fy,cx,cy replacing the refined intrinsics");
  metricize->add_flag("--tracked-only", mopt.tracked_only,
                      "Project only points observed by the keyframe");
  metricize->add_option("--format", format_text, "Output depth format")
      ->check(CLI::IsMember({"pfm", "png16"}))
      ->capture_default_str();
  metricize->add_option("--jobs", mopt.jobs, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  metricize->add_option("--frame-list", frame_list,
                        "File listing every frame name of the sequence");
  metricize->add_option("--batch", batch_file,
                        "CSV of sequence,model_dir,anchor_depth,anchor_name,out_dir");

  // evaluate
  auto* evaluate = app.add_subcommand(
      "evaluate", "Disparity and depth metrics, aggregated per sequence");
  EvaluateOptions eopt;
  std::string input_text = "disparity", rig_text, from_csv;
  bool pixel_weighted = false;
  evaluate->add_option("--pred", eopt.pred_dir, "Prediction directory");
  evaluate->add_option("--gt", eopt.gt_dir, "Ground-truth directory");
  evaluate->add_option("--out", eopt.out_csv, "Output CSV")->required();
  evaluate->add_option("--input", input_text, "Map kind in pred/gt")
      ->check(CLI::IsMember({"disparity", "depth"}))
      ->capture_default_str();
  evaluate->add_option("--rig", rig_text, "fx,baseline (pixels, millimeters)");
  evaluate->add_option("--from-csv", from_csv,
                       "Aggregate precomputed per-sequence rows instead");
  evaluate->add_flag("--pixel-weighted", pixel_weighted,
                     "Weight rows by valid pixel count instead of equally");
  evaluate->add_option("--bad-threshold", eopt.bad_threshold,
                       "Bad-pixel disparity threshold")
      ->capture_default_str();

  // manifest
  auto* manifest = app.add_subcommand("manifest", "Train/validation manifest");
  ManifestOptions nopt;
  std::string split_file;
  manifest->add_option("sequence_dirs", nopt.sequence_dirs,
                       "Metricize output directories named <dataset>_<keyframe>");
  manifest->add_option("--split-file", split_file,
                       "CSV of split,sequence overriding the default split");
  manifest->add_option("--out", nopt.out_dir, "Output directory")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "Export a synthetic oracle scene");
  SceneSpec spec;
  spec.float32_anchor = true;
  std::string surface_text = "plane", synth_out;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--surface", surface_text)
      ->check(CLI::IsMember({"plane", "sphere"}))
      ->capture_default_str();
  synth->add_option("--points", spec.n_points)->capture_default_str();
  synth->add_option("--frames", spec.n_frames)->capture_default_str();
  synth->add_option("--unregistered", spec.n_unregistered,
                    "Extra frame names listed but absent from the model")
      ->capture_default_str();
  synth->add_option("--scale", spec.true_scale, "True scale s0 (mm per unit)")
      ->capture_default_str();
  synth->add_option("--noise", spec.noise_sigma, "Point noise sigma (mm)")
      ->capture_default_str();
  synth->add_option("--seed", spec.seed)->capture_default_str();
  synth->add_option("--width", spec.intrinsics.width)->capture_default_str();
  synth->add_option("--height", spec.intrinsics.height)->capture_default_str();
  synth->add_option("--depth", spec.surface_depth, "Surface distance (mm)")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*metricize) {
      mopt.format =
          format_text == "png16" ? DepthFileFormat::kPng16 : DepthFileFormat::kPfm;
      if (!override_text.empty()) {
        const auto v = SplitNumbers(override_text, 4, "--intrinsics-override");
        mopt.intrinsics_override = std::array<double, 4>{v[0], v[1], v[2], v[3]};
      }
      if (!frame_list.empty()) mopt.frame_list = frame_list;

      if (!batch_file.empty()) {
        auto sequences = ReadBatchFile(batch_file);
        for (auto& s : sequences) {
          s.min_samples = mopt.min_samples;
          s.intrinsics_override = mopt.intrinsics_override;
          s.tracked_only = mopt.tracked_only;
          s.format = mopt.format;
        }
        const BatchOutcome outcome = RunMetricizeBatch(sequences, mopt.jobs);
        for (const auto& s : outcome.succeeded) {
          std::cout << nlohmann::ordered_json{{"sequence", s.sequence},
                                              {"scale", s.scale.scale},
                                              {"maps", s.maps_written}}
                           .dump()
                    << '\n';
        }
        for (const auto& f : outcome.failed) std::cout << f.ToJson() << '\n';
        return outcome.failed.empty() ? 0 : 1;
      }

      if (mopt.model_dir.empty() || mopt.anchor_depth_path.empty() ||
          mopt.anchor_image_name.empty() || mopt.out_dir.empty()) {
        return Fail({"InvalidArgument",
                     "metricize needs --model, --anchor-depth, --anchor-name "
                     "and --out (or --batch)",
                     std::nullopt});
      }
      try {
        const MetricizeSummary s = RunMetricize(mopt);
        std::cout << nlohmann::ordered_json{
                         {"sequence", s.sequence},
                         {"scale", s.scale.scale},
                         {"sample_count", s.scale.sample_count},
                         {"maps", s.maps_written},
                         {"unregistered", s.unregistered.size()}}
                         .dump()
                  << '\n';
      } catch (const Error& e) {
        const std::string seq = mopt.sequence.empty()
                                    ? fs::path(mopt.out_dir).filename().string()
                                    : mopt.sequence;
        return Fail(ErrorRecord::From(e, seq), mopt.out_dir);
      }
      return 0;
    }

    if (*evaluate) {
      eopt.input = input_text == "depth" ? EvalInput::kDepth : EvalInput::kDisparity;
      eopt.mode = pixel_weighted ? AggregationMode::kPixelWeighted
                                 : AggregationMode::kPerSequenceMean;
      if (!rig_text.empty()) {
        const auto v = SplitNumbers(rig_text, 2, "--rig");
        eopt.rig = StereoRig{v[0], v[1]};
      }
      if (!from_csv.empty()) {
        eopt.from_csv = from_csv;
      } else if (eopt.pred_dir.empty() || eopt.gt_dir.empty()) {
        return Fail({"InvalidArgument",
                     "evaluate needs --pred and --gt (or --from-csv)",
                     std::nullopt});
      }
      const EvaluateSummary s = RunEvaluate(eopt);
      std::cout << nlohmann::ordered_json{{"pairs", s.pairs},
                                          {"sequences", s.result.rows.size()},
                                          {"unmatched", s.unmatched.size()}}
                       .dump()
                << '\n';
      return 0;
    }

    if (*manifest) {
      if (!split_file.empty()) nopt.split_file = split_file;
      const SplitManifest m = RunManifest(nopt);
      std::cout << nlohmann::ordered_json{{"train", m.train_total()},
                                          {"validation", m.validation_total()},
                                          {"grand_total", m.grand_total()}}
                       .dump()
                << '\n';
      return 0;
    }

    if (*synth) {
      spec.surface = surface_text == "sphere" ? SurfaceKind::kSpherePatch
                                              : SurfaceKind::kPlane;
      spec.intrinsics.cx = spec.intrinsics.width / 2.0 - 0.7;
      spec.intrinsics.cy = spec.intrinsics.height / 2.0 + 0.6;
      const SyntheticScene scene = MakeScene(spec);
      WriteScene(scene, synth_out);
      std::cout << nlohmann::ordered_json{{"out", synth_out},
                                          {"anchor_name", scene.anchor_name},
                                          {"true_scale", spec.true_scale}}
                       .dump()
                << '\n';
      return 0;
    }
  } catch (const Error& e) {
    return Fail(ErrorRecord::From(e));
  }
  return 0;
}
