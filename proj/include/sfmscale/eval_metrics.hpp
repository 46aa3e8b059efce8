#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sfmscale/depth_io.hpp"

namespace sfmscale {

struct StereoRig {
  double fx = 0.0;        // pixels
  double baseline = 0.0;  // millimeters

  void Validate() const;
};

// Disparities at or below this are treated as "no match".
inline constexpr double kMinDisparity = 1e-6;
inline constexpr double kDefaultBadThreshold = 3.0;
inline constexpr double kDefaultDeltaBase = 1.25;

// depth = fx * baseline / disparity
DepthMap DepthFromDisparity(const DepthMap& disparity, const StereoRig& rig);
// disparity = fx * baseline / depth
DepthMap DisparityFromDepth(const DepthMap& depth, const StereoRig& rig);

struct DisparityMetrics {
  double epe = 0.0;
  double rmse = 0.0;
  double bad_percent = 0.0;
  std::size_t count = 0;
};

struct DepthMetrics {
  double abs_rel = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
  double delta1_percent = 0.0;
  std::size_t count = 0;
};

// Kernels over already-paired samples. Throw kEmptyOverlap on empty input.
DisparityMetrics ComputeDisparityMetrics(std::span<const double> pred,
                                         std::span<const double> gt,
                                         double bad_threshold = kDefaultBadThreshold);
// Throws kNonPositiveGroundTruth when any gt sample is <= 0.
DepthMetrics ComputeDepthMetrics(std::span<const double> pred,
                                 std::span<const double> gt,
                                 double delta_base = kDefaultDeltaBase);

// Map versions evaluate over the valid intersection. Bad-pixel uses
// |pred - gt| > threshold; delta uses max(pred/gt, gt/pred) < base.
DisparityMetrics DisparityMetricsOf(const DepthMap& pred, const DepthMap& gt,
                                    double bad_threshold = kDefaultBadThreshold);
DepthMetrics DepthMetricsOf(const DepthMap& pred, const DepthMap& gt,
                            double delta_base = kDefaultDeltaBase);

struct MetricReport {
  double epe = 0.0;
  double disp_rmse = 0.0;
  double bad3 = 0.0;
  double abs_rel = 0.0;
  double depth_rmse = 0.0;
  double mae = 0.0;
  double delta1 = 0.0;
  std::size_t valid_pixel_count = 0;

  static MetricReport From(const DisparityMetrics& disp,
                           const DepthMetrics& depth);
};

inline constexpr int kMetricColumnCount = 7;
// Column order shared by CSV output and the Field accessor.
inline constexpr const char* kMetricColumns[kMetricColumnCount] = {
    "epe", "disp_rmse", "bad3", "abs_rel", "depth_rmse", "mae", "delta1"};
double& MetricField(MetricReport& report, int column);
double MetricField(const MetricReport& report, int column);

enum class AggregationMode {
  kPerSequenceMean,  // unweighted mean of rows
  kPixelWeighted,    // rows weighted by valid_pixel_count
};

using SequenceReport = std::pair<std::string, MetricReport>;

struct AggregateResult {
  std::vector<SequenceReport> rows;
  MetricReport mean;
  MetricReport variance;  // population variance across rows
};

AggregateResult Aggregate(std::vector<SequenceReport> reports,
                          AggregationMode mode = AggregationMode::kPerSequenceMean);

// CSV with header `sequence,epe,disp_rmse,bad3,abs_rel,depth_rmse,mae,delta1`,
// one row per sequence, then `mean` and `variance` rows. 3 decimals.
void WriteMetricsCsv(std::ostream& out, const AggregateResult& result);
// Reads per-sequence rows from the same layout; `mean`/`variance` rows and
// blank/`#` lines are skipped.
std::vector<SequenceReport> ReadMetricsCsv(std::istream& in);

}  // namespace sfmscale
