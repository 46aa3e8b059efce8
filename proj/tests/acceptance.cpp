// Acceptance gate: prints one PASS/FAIL line per criterion, exits 1 on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sfmscale/depth_io.hpp"
#include "sfmscale/error.hpp"
#include "sfmscale/eval_metrics.hpp"
#include "sfmscale/manifest.hpp"
#include "sfmscale/reprojection.hpp"
#include "sfmscale/scale_recovery.hpp"
#include "sfmscale/sfm_model.hpp"
#include "sfmscale/synthetic.hpp"
#include "support/random_model.hpp"
#include "support/run.hpp"
#include "support/warp_oracle.hpp"

using namespace sfmscale;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void Require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

bool SameBits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

DepthMap Row(std::vector<double> v, DepthUnit unit) {
  const int n = static_cast<int>(v.size());
  return DepthMap({n, 1}, unit, std::move(v));
}

std::string Fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1
Outcome ScaleExactness() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> log_s(std::log(0.01), std::log(100.0));
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    SceneSpec spec;
    spec.surface = i % 2 ? SurfaceKind::kSpherePatch : SurfaceKind::kPlane;
    spec.true_scale = std::exp(log_s(rng));
    spec.seed = 5000 + i;
    spec.n_frames = 2;
    const SyntheticScene scene = MakeScene(spec);
    const DepthMap sparse =
        ProjectSparseDepth(scene.model, scene.anchor_id, spec.intrinsics);
    const double s = RecoverScale(scene.anchor_depth, sparse).scale;
    worst = std::max(worst, std::abs(s - spec.true_scale) / spec.true_scale);
  }
  const double elapsed = Seconds(t0);
  o.Require(worst <= 1e-9, "max rel err " + Fmt("%.3g", worst));
  o.Require(elapsed < 10.0, "runtime " + Fmt("%.2f", elapsed) + " s");
  o.detail = o.pass ? "100 scenes, max rel err " + Fmt("%.3g", worst) + ", " +
                          Fmt("%.2f", elapsed) + " s"
                    : o.detail;
  return o;
}

// 2
Outcome ScaleRobustness() {
  Outcome o;
  std::mt19937_64 rng(2002);
  std::uniform_real_distribution<double> val(1.0, 500.0);
  std::uniform_real_distribution<double> factor(10.0, 1000.0);
  std::uniform_int_distribution<int> exponent(-7, 7);
  std::uniform_real_distribution<double> log_s(std::log(0.01), std::log(100.0));
  std::uniform_int_distribution<int> size(100, 400);
  int bitwise_trials = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = size(rng);
    std::vector<double> metric(n), unscaled(n);
    // Two ways to make every clean ratio the same double: a dyadic scale over
    // arbitrary depths, or an arbitrary scale over unit depths.
    const bool dyadic = trial % 2 == 0;
    const double s0 = dyadic ? std::ldexp(1.0, exponent(rng)) : std::exp(log_s(rng));
    for (std::size_t i = 0; i < n; ++i) {
      unscaled[i] = dyadic ? val(rng) : 1.0;
      metric[i] = s0 * unscaled[i];
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t corrupt = n * 2 / 5;
    std::vector<double> clean;
    for (std::size_t j = 0; j < n; ++j) {
      if (j < corrupt) {
        metric[idx[j]] *= factor(rng);
      } else {
        clean.push_back(metric[idx[j]] / unscaled[idx[j]]);
      }
    }
    // Clean median by full sort.
    std::sort(clean.begin(), clean.end());
    const std::size_t m = clean.size();
    const double clean_median =
        m % 2 ? clean[m / 2] : (clean[m / 2 - 1] + clean[m / 2]) / 2.0;
    const double s = RecoverScale(Row(metric, DepthUnit::kMillimeters),
                                  Row(unscaled, DepthUnit::kUnscaled))
                         .scale;
    ++bitwise_trials;
    if (!SameBits(s, clean_median)) {
      o.Require(false, "trial " + std::to_string(trial) + ": " + Fmt("%.17g", s) +
                           " != " + Fmt("%.17g", clean_median));
      break;
    }
  }

  // Oracle scenes: corrupt 40% of the sparse samples; the estimate stays on s0.
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    SceneSpec spec;
    spec.true_scale = std::exp(log_s(rng));
    spec.seed = 7000 + trial;
    spec.n_frames = 2;
    spec.n_points = 300;
    const SyntheticScene scene = MakeScene(spec);
    DepthMap sparse = ProjectSparseDepth(scene.model, scene.anchor_id, spec.intrinsics);
    std::vector<std::size_t> valid;
    for (std::size_t i = 0; i < sparse.pixel_count(); ++i) {
      if (sparse.valid(i)) valid.push_back(i);
    }
    std::shuffle(valid.begin(), valid.end(), rng);
    // Dividing the unscaled sample multiplies its ratio by the factor.
    for (std::size_t j = 0; j < valid.size() * 2 / 5; ++j) sparse[valid[j]] /= factor(rng);
    const double s = RecoverScale(scene.anchor_depth, sparse).scale;
    worst = std::max(worst, std::abs(s - spec.true_scale) / spec.true_scale);
  }
  o.Require(worst <= 1e-9, "oracle-scene rel err " + Fmt("%.3g", worst));
  if (o.pass) {
    o.detail = std::to_string(bitwise_trials) +
               " trials bitwise equal to clean median; oracle scenes max rel err " +
               Fmt("%.3g", worst);
  }
  return o;
}

// 3
Outcome ReprojectionOracle() {
  Outcome o;
  const auto t0 = Clock::now();
  double worst_agreement = 1.0, worst_diff = 0.0;
  std::size_t frames = 0;
  for (const SurfaceKind surface : {SurfaceKind::kPlane, SurfaceKind::kSpherePatch}) {
    SceneSpec spec;
    spec.surface = surface;
    spec.n_frames = 6;
    spec.seed = surface == SurfaceKind::kPlane ? 31 : 32;
    spec.intrinsics.width = 160;
    spec.intrinsics.height = 128;
    spec.intrinsics.cx = 79.3;
    spec.intrinsics.cy = 64.6;
    const SyntheticScene scene = MakeScene(spec);
    const auto& K = spec.intrinsics;
    const Pose& anchor = scene.metric_poses.at(scene.anchor_id);
    for (const auto& [id, pose] : scene.metric_poses) {
      const DepthMap out = ReprojectDepth(scene.anchor_depth, anchor, pose, K, K);
      if (id == scene.anchor_id) {
        o.Require(out.SameContent(scene.anchor_depth), "identity warp not bit-exact");
        continue;
      }
      const DepthMap ref = testing::OracleWarp(scene.anchor_depth, anchor, pose, K, K);
      const auto cmp = testing::CompareMaps(out, ref, 1e-6);
      o.Require(cmp.mutually_valid > 0, "frame with no overlap");
      worst_agreement = std::min(worst_agreement, cmp.agreement());
      worst_diff = std::max(worst_diff, cmp.max_abs_diff);
      ++frames;
    }
  }
  // Identity warp on random, non-smooth maps too.
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> val(1.0, 900.0), unit(0.0, 1.0);
  const CameraIntrinsics K{1, CameraModel::kPinhole, 128, 128, 140, 141, 63.7, 64.2};
  for (int i = 0; i < 5; ++i) {
    DepthMap d({K.width, K.height}, DepthUnit::kMillimeters);
    for (auto& x : d.values()) x = unit(rng) < 0.1 ? 0.0 : val(rng);
    const Pose p = testing::RandomPose(rng, PoseConvention::kWorldToCamera);
    o.Require(ReprojectDepth(d, p, p, K, K).SameContent(d), "random identity warp");
  }
  const double elapsed = Seconds(t0);
  o.Require(worst_agreement >= 0.999, "agreement " + Fmt("%.5f", worst_agreement));
  o.Require(elapsed < 30.0, "runtime " + Fmt("%.2f", elapsed) + " s");
  if (o.pass) {
    o.detail = std::to_string(frames) + " frames, min agreement " +
               Fmt("%.5f", worst_agreement) + ", max diff " + Fmt("%.3g", worst_diff) +
               " mm, identity bit-exact, " + Fmt("%.2f", elapsed) + " s";
  }
  return o;
}

// 4
Outcome PoseContract() {
  Outcome o;
  std::mt19937_64 rng(4004);
  std::uniform_real_distribution<double> log_s(std::log(0.01), std::log(100.0));
  SparseModel model;
  model.cameras.emplace(1, CameraIntrinsics{1, CameraModel::kPinhole, 64, 64, 50, 50, 32, 32});
  for (image_t id = 1; id <= 1000; ++id) {
    RegisteredImage img;
    img.image_id = id;
    img.name = std::to_string(id) + ".png";
    img.camera_id = 1;
    img.pose = testing::RandomPose(rng, PoseConvention::kWorldToCamera, 500.0);
    model.images.emplace(id, img);
  }
  for (int round = 0; round < 3; ++round) {
    const double s = std::exp(log_s(rng));
    const auto metric = MetricizePoses(model, ScaleResult{s, 1, 0.0});
    o.Require(metric.size() == 1000, "pose count");
    for (const auto& [id, img] : model.images) {
      const Pose before = img.pose.As(PoseConvention::kCameraToWorld);
      const Pose& after = metric.at(id);
      const Eigen::Vector3d c = CameraCenter(img.pose);
      bool ok = BitwiseEqual(after.rotation, before.rotation) &&
                after.convention == PoseConvention::kCameraToWorld;
      for (int k = 0; k < 3; ++k) ok = ok && SameBits(after.translation[k], s * c[k]);
      if (!ok) {
        o.Require(false, "image " + std::to_string(id));
        return o;
      }
    }
  }
  // Single poses in either convention.
  for (int i = 0; i < 1000; ++i) {
    const Pose p = testing::RandomPose(rng, i % 2 ? PoseConvention::kCameraToWorld
                                                  : PoseConvention::kWorldToCamera);
    const double s = std::exp(log_s(rng));
    const Pose m = MetricizePose(p, s);
    const Eigen::Vector3d c = CameraCenter(p);
    bool ok = BitwiseEqual(m.rotation, p.As(PoseConvention::kCameraToWorld).rotation);
    for (int k = 0; k < 3; ++k) ok = ok && SameBits(m.translation[k], s * c[k]);
    o.Require(ok, "pose " + std::to_string(i));
    if (!ok) return o;
  }
  o.detail = "3x1000 model poses + 1000 single poses: rotations bitwise, centers x s exact";
  return o;
}

// 5
Outcome MetricFixtures() {
  Outcome o;
  using V = std::vector<double>;
  const auto e13 = ComputeDisparityMetrics(V{11, 7}, V{10, 10});
  o.Require(e13.epe == 2.0 && e13.rmse == std::sqrt(5.0) && e13.bad_percent == 0.0,
            "errors {1,3}");
  o.Require(ComputeDisparityMetrics(V{1, 2, 4, 5}, V{0, 0, 0, 0}).bad_percent == 50.0,
            "errors {1,2,4,5}");
  const auto same = ComputeDisparityMetrics(V{4, 5}, V{4, 5});
  o.Require(same.epe == 0 && same.rmse == 0 && same.bad_percent == 0, "disp pred == gt");
  o.Require(ComputeDepthMetrics(V{1.0, 2.0}, V{1.2, 2.6}).delta1_percent == 50.0,
            "delta example");
  const auto single = ComputeDepthMetrics(V{110}, V{100});
  o.Require(single.abs_rel == 0.1 && single.rmse == 10.0 && single.mae == 10.0 &&
                single.delta1_percent == 100.0,
            "110 vs 100");
  const auto dsame = ComputeDepthMetrics(V{4, 5}, V{4, 5});
  o.Require(dsame.abs_rel == 0 && dsame.rmse == 0 && dsame.mae == 0 &&
                dsame.delta1_percent == 100,
            "depth pred == gt");
  MetricReport a, b;
  a.epe = 1;
  b.epe = 3;
  o.Require(Aggregate({{"a", a}, {"b", b}}).mean.epe == 2.0, "mean of 1 and 3");

  std::ifstream in(std::string(SFMSCALE_FIXTURES) + "/table5_per_keyframe.csv");
  std::ifstream expected(std::string(SFMSCALE_FIXTURES) + "/table5_mean.csv");
  if (!in || !expected) {
    o.Require(false, "fixture missing");
    return o;
  }
  const auto rows = ReadMetricsCsv(in);
  o.Require(rows.size() == 25, "expected 25 rows");
  const AggregateResult agg = Aggregate(rows);
  std::string line, mismatches;
  std::getline(expected, line);
  int checked = 0;
  while (std::getline(expected, line)) {
    std::istringstream cells(line);
    std::string column, value, decimals;
    std::getline(cells, column, ',');
    std::getline(cells, value, ',');
    std::getline(cells, decimals, ',');
    const int col = static_cast<int>(
        std::find_if(std::begin(kMetricColumns), std::end(kMetricColumns),
                     [&](const char* c) { return column == c; }) -
        std::begin(kMetricColumns));
    const double target = std::stod(value);
    const double tol = 0.5 * std::pow(10.0, -std::stoi(decimals));
    const double got = MetricField(agg.mean, col);
    ++checked;
    if (!(std::abs(got - target) <= tol + 1e-12)) {
      if (!mismatches.empty()) mismatches += ", ";
      mismatches += column + " " + Fmt("%.4f", got) + " vs " + value;
    }
  }
  o.Require(checked == 7, "mean fixture incomplete");
  o.Require(mismatches.empty(), "reference mean row not reproduced: " + mismatches);
  if (o.pass) o.detail = "hand examples exact; reference mean row reproduced";
  return o;
}

// 6
Outcome ManifestFixture() {
  Outcome o;
  std::ifstream in(std::string(SFMSCALE_FIXTURES) + "/table4_counts.csv");
  if (!in) {
    o.Require(false, "fixture missing");
    return o;
  }
  SequenceFrames frames;
  SplitAssignment fixture_split;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::istringstream cells(line);
    std::string split, seq, count;
    std::getline(cells, split, ',');
    std::getline(cells, seq, ',');
    std::getline(cells, count, ',');
    const SequenceId id = SequenceId::Parse(seq);
    (split == "train" ? fixture_split.train : fixture_split.validation).push_back(id);
    auto& names = frames[id];
    for (unsigned long i = 0; i < std::stoul(count); ++i) {
      names.push_back(seq + "_" + std::to_string(i) + ".png");
    }
  }
  const SplitAssignment def = DefaultSplit();
  o.Require(def.train == fixture_split.train && def.validation == fixture_split.validation,
            "default split differs from the fixture");
  const SplitManifest m = BuildManifest(frames, def);
  o.Require(m.train_total() == 12330, "train " + std::to_string(m.train_total()));
  o.Require(m.validation_total() == 4805, "validation " + std::to_string(m.validation_total()));
  o.Require(m.grand_total() == 17135, "grand " + std::to_string(m.grand_total()));
  const double pct = 100.0 * m.train_total() / m.grand_total();
  o.Require(std::abs(pct - 70.0) <= 3.0, "train share " + Fmt("%.2f", pct));
  if (o.pass) {
    o.detail = "12330 / 4805 / 17135, train share " + Fmt("%.2f", pct) + "%";
  }
  return o;
}

// 7
Outcome ParserRoundTrip() {
  Outcome o;
  std::mt19937_64 rng(7007);
  for (int i = 0; i < 50; ++i) {
    const SparseModel model = testing::RandomModel(rng);
    std::ostringstream c, im, p;
    WriteCameras(c, model.cameras);
    WriteImages(im, model.images);
    WritePoints3D(p, model.points);
    std::istringstream ci(c.str()), ii(im.str()), pi(p.str());
    SparseModel back;
    back.cameras = ParseCameras(ci);
    back.images = ParseImages(ii);
    back.points = ParsePoints3D(pi);
    if (!(back == model)) {
      o.Require(false, "model " + std::to_string(i) + " differs after round trip");
      break;
    }
  }

  enum Kind { kCam, kImg, kPts };
  struct Case {
    Kind kind;
    const char* text;
    ErrorCode code;
  };
  const std::vector<Case> corpus = {
      {kCam, "1 OPENCV 640 480 500 500 320 240 0 0 0 0\n", ErrorCode::kUnsupportedCameraModel},
      {kCam, "1 PINHOLE 640 480 500 500 320\n", ErrorCode::kMalformedLine},
      {kCam, "1 PINHOLE 640 480 5x0 500 320 240\n", ErrorCode::kMalformedLine},
      {kCam, "1 SIMPLE_PINHOLE 640 480 500 320 240 7\n", ErrorCode::kMalformedLine},
      {kCam, "1 PINHOLE -640 480 500 500 320 240\n", ErrorCode::kMalformedLine},
      {kImg, "1 1 0 0 0 0 0 0 1\n\n", ErrorCode::kMalformedLine},
      {kImg, "1 1 0 0 0 0 0 0 1 a.png\n1 2\n", ErrorCode::kOddObservationTriples},
      {kImg, "1 1 0 0 0 0 0 0 1 a.png\n1 2 3 4\n", ErrorCode::kOddObservationTriples},
      {kImg, "1 0 0 0 0 0 0 0 1 a.png\n\n", ErrorCode::kMalformedLine},
      {kImg, "x 1 0 0 0 0 0 0 1 a.png\n\n", ErrorCode::kMalformedLine},
      {kPts, "5 1 2 3 255 0 0 0.8 7\n", ErrorCode::kOddTrackPairs},
      {kPts, "5 1 2 3 255 0\n", ErrorCode::kMalformedLine},
      {kPts, "5 1 2 3 300 0 0 0.8\n", ErrorCode::kMalformedLine},
      {kPts, "5 1 2 nan? 1 1 1 0.8\n", ErrorCode::kMalformedLine},
  };
  int designated = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    std::istringstream in(corpus[i].text);
    try {
      switch (corpus[i].kind) {
        case kCam: ParseCameras(in); break;
        case kImg: ParseImages(in); break;
        case kPts: ParsePoints3D(in); break;
      }
      o.Require(false, "case " + std::to_string(i) + " accepted");
    } catch (const Error& e) {
      if (e.code() == corpus[i].code) {
        ++designated;
      } else {
        o.Require(false, "case " + std::to_string(i) + " gave " +
                             std::string(e.code_name()));
      }
    } catch (const std::exception& e) {
      o.Require(false, "case " + std::to_string(i) + " threw " + e.what());
    }
  }
  if (o.pass) {
    o.detail = "50 models equal after round trip; " + std::to_string(designated) + "/" +
               std::to_string(corpus.size()) + " malformed cases gave designated errors";
  }
  return o;
}

// 8
Outcome DepthRoundTrip() {
  Outcome o;
  const fs::path dir = testing::FreshTempDir("acc_depth");
  std::mt19937_64 rng(8008);
  std::uniform_int_distribution<int> dim(1, 96);
  std::uniform_real_distribution<double> val(0.01, 255.9), unit(0.0, 1.0);
  double worst_png = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const ImageSize size{dim(rng), dim(rng)};
    std::vector<double> v(size.area());
    for (auto& x : v) {
      const double r = unit(rng);
      // Maps hold Pf-representable (float32) values; invalid in several spellings.
      x = r < 0.15 ? 0.0 : r < 0.2 ? -5.0 : r < 0.22 ? NAN : static_cast<float>(val(rng));
    }
    const DepthMap m(size, DepthUnit::kMillimeters, v);
    SaveDepth(m, dir / "m.pfm", DepthFileFormat::kPfm);
    const DepthMap pf = LoadDepth(dir / "m.pfm", DepthUnit::kMillimeters, size);
    SaveDepth(m, dir / "m.png", DepthFileFormat::kPng16);
    const DepthMap png = LoadDepth(dir / "m.png", DepthUnit::kMillimeters, size);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (pf.valid(i) != m.valid(i) || png.valid(i) != m.valid(i)) {
        o.Require(false, "validity changed");
        break;
      }
      if (!m.valid(i)) continue;
      if (!SameBits(pf[i], m[i])) {
        o.Require(false, "Pf value changed");
        break;
      }
      worst_png = std::max(worst_png, std::abs(png[i] - m[i]));
    }
    if (!o.pass) break;
  }
  fs::remove_all(dir);
  o.Require(worst_png <= 1.0 / 256.0, "PNG error " + Fmt("%.6f", worst_png));
  if (o.pass) {
    o.detail = "50 maps: Pf bit-exact, PNG max err " + Fmt("%.6f", worst_png) +
               " mm, validity preserved";
  }
  return o;
}

// 9
Outcome EndToEndDeterminism() {
  Outcome o;
  const fs::path root = testing::FreshTempDir("acc_e2e");
  using testing::Q;
  const auto synth = testing::Run(testing::Cli() + " synth --out " + Q(root / "scene") +
                                  " --surface sphere --scale 12.5 --frames 8"
                                  " --unregistered 3 --seed 99 --width 160 --height 128");
  o.Require(synth.exit_code == 0, "synth failed");
  const auto metricize = [&](const std::string& out, const std::string& jobs) {
    return testing::Run(testing::Cli() + " metricize --model " + Q(root / "scene" / "sparse") +
                        " --anchor-depth " + Q(root / "scene" / "anchor.depth.pfm") +
                        " --anchor-name keyframe.png --sequence 3_4 --frame-list " +
                        Q(root / "scene" / "frames.txt") + " --jobs " + jobs + " --out " +
                        Q(root / out));
  };
  const auto r1 = metricize("run1", "1");
  const auto r2 = metricize("run2", "4");
  o.Require(r1.exit_code == 0 && r2.exit_code == 0, "metricize failed");
  const auto t1 = testing::Tree(root / "run1"), t2 = testing::Tree(root / "run2");
  o.Require(!t1.empty() && t1 == t2, "output trees differ");
  o.Require(r1.out == r2.out, "stdout differs");
  fs::remove_all(root);
  if (o.pass) o.detail = std::to_string(t1.size()) + " files byte-identical across runs";
  return o;
}

// 10
Outcome DepthFromDisparityCheck() {
  Outcome o;
  const StereoRig rig{1000.0, 5.0};
  const DepthMap d =
      DepthFromDisparity(Row({10.0, 0.0, 20.0}, DepthUnit::kDisparityPixels), rig);
  o.Require(d[0] == 500.0, "500 mm example gave " + Fmt("%.17g", d[0]));
  o.Require(!d.valid(1), "zero disparity should be invalid");
  o.Require(d[2] == 250.0, "doubling disparity should halve depth");

  std::mt19937_64 rng(1010);
  std::uniform_real_distribution<double> disp(0.1, 500.0), fx(200.0, 3000.0),
      base(0.5, 20.0), unit(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const StereoRig r{fx(rng), base(rng)};
    std::vector<double> v(1000);
    for (auto& x : v) x = unit(rng) < 0.1 ? 0.0 : disp(rng);
    const DepthMap m = Row(v, DepthUnit::kDisparityPixels);
    const DepthMap back = DisparityFromDepth(DepthFromDisparity(m, r), r);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (back.valid(i) != m.valid(i)) {
        o.Require(false, "validity changed");
        return o;
      }
      if (m.valid(i)) worst = std::max(worst, std::abs(back[i] - v[i]) / v[i]);
    }
  }
  o.Require(worst <= 1e-9, "inversion rel err " + Fmt("%.3g", worst));
  if (o.pass) o.detail = "500 mm exact; inversion max rel err " + Fmt("%.3g", worst);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"scale recovery exactness", ScaleExactness},
      {"scale recovery robustness", ScaleRobustness},
      {"reprojection oracle equivalence", ReprojectionOracle},
      {"pose metricization contract", PoseContract},
      {"metric fixtures", MetricFixtures},
      {"manifest fixture", ManifestFixture},
      {"parser round trip", ParserRoundTrip},
      {"depth I/O round trip", DepthRoundTrip},
      {"end-to-end determinism", EndToEndDeterminism},
      {"depth from disparity", DepthFromDisparityCheck},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::cout << "Criterion " << i + 1 << ": " << (o.pass ? "PASS" : "FAIL") << " - "
              << criteria[i].first << " (" << o.detail << ")" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
