#include "sfmscale/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "sfmscale/error.hpp"
#include "text_util.hpp"

namespace sfmscale {

void StereoRig::Validate() const {
  if (!(fx > 0.0) || !(baseline > 0.0) || !std::isfinite(fx) ||
      !std::isfinite(baseline)) {
    throw Error(ErrorCode::kInvalidArgument,
                "stereo rig needs positive finite fx and baseline");
  }
}

namespace {

DepthMap InvertWithRig(const DepthMap& in, const StereoRig& rig,
                       DepthUnit out_unit) {
  rig.Validate();
  const double numerator = rig.fx * rig.baseline;
  DepthMap out(in.size(), out_unit);
  for (std::size_t i = 0; i < in.pixel_count(); ++i) {
    if (in.valid(i) && in[i] > kMinDisparity) out[i] = numerator / in[i];
  }
  return out;
}

void RequireUnit(const DepthMap& map, DepthUnit unit, const char* role) {
  if (map.unit() != unit) {
    throw Error(ErrorCode::kNonMetricInput,
                std::string(role) + " map is " +
                    std::string(DepthUnitName(map.unit())) + ", expected " +
                    std::string(DepthUnitName(unit)));
  }
}

void Gather(const DepthMap& pred, const DepthMap& gt, std::vector<double>& p,
            std::vector<double>& g) {
  for (const std::size_t i : ValidIntersection(pred, gt)) {
    p.push_back(pred[i]);
    g.push_back(gt[i]);
  }
}

void RequireSamples(std::span<const double> pred, std::span<const double> gt) {
  if (pred.size() != gt.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "pred/gt sample counts differ");
  }
  if (pred.empty()) {
    throw Error(ErrorCode::kEmptyOverlap, "no pixel is valid in both maps");
  }
}

}  // namespace

DepthMap DepthFromDisparity(const DepthMap& disparity, const StereoRig& rig) {
  return InvertWithRig(disparity, rig, DepthUnit::kMillimeters);
}

DepthMap DisparityFromDepth(const DepthMap& depth, const StereoRig& rig) {
  return InvertWithRig(depth, rig, DepthUnit::kDisparityPixels);
}

DisparityMetrics ComputeDisparityMetrics(std::span<const double> pred,
                                         std::span<const double> gt,
                                         double bad_threshold) {
  RequireSamples(pred, gt);
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  std::size_t bad = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double err = std::abs(pred[i] - gt[i]);
    abs_sum += err;
    sq_sum += err * err;
    if (err > bad_threshold) ++bad;
  }
  const double n = static_cast<double>(pred.size());
  return {abs_sum / n, std::sqrt(sq_sum / n), 100.0 * bad / n, pred.size()};
}

DepthMetrics ComputeDepthMetrics(std::span<const double> pred,
                                 std::span<const double> gt,
                                 double delta_base) {
  RequireSamples(pred, gt);
  double rel_sum = 0.0;
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  std::size_t within = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(gt[i] > 0.0)) {
      throw Error(ErrorCode::kNonPositiveGroundTruth,
                  "ground truth sample " + std::to_string(i) + " is " +
                      detail::FormatDouble(gt[i], 6));
    }
    const double err = std::abs(pred[i] - gt[i]);
    rel_sum += err / gt[i];
    abs_sum += err;
    sq_sum += err * err;
    if (std::max(pred[i] / gt[i], gt[i] / pred[i]) < delta_base) ++within;
  }
  const double n = static_cast<double>(pred.size());
  return {rel_sum / n, std::sqrt(sq_sum / n), abs_sum / n, 100.0 * within / n,
          pred.size()};
}

DisparityMetrics DisparityMetricsOf(const DepthMap& pred, const DepthMap& gt,
                                    double bad_threshold) {
  RequireUnit(pred, DepthUnit::kDisparityPixels, "predicted");
  RequireUnit(gt, DepthUnit::kDisparityPixels, "ground-truth");
  std::vector<double> p, g;
  Gather(pred, gt, p, g);
  return ComputeDisparityMetrics(p, g, bad_threshold);
}

DepthMetrics DepthMetricsOf(const DepthMap& pred, const DepthMap& gt,
                            double delta_base) {
  RequireUnit(pred, DepthUnit::kMillimeters, "predicted");
  if (gt.unit() != DepthUnit::kMillimeters) {
    throw Error(ErrorCode::kNonPositiveGroundTruth,
                "ground truth is " + std::string(DepthUnitName(gt.unit())) +
                    ", not metric depth");
  }
  std::vector<double> p, g;
  Gather(pred, gt, p, g);
  return ComputeDepthMetrics(p, g, delta_base);
}

MetricReport MetricReport::From(const DisparityMetrics& disp,
                                const DepthMetrics& depth) {
  MetricReport r;
  r.epe = disp.epe;
  r.disp_rmse = disp.rmse;
  r.bad3 = disp.bad_percent;
  r.abs_rel = depth.abs_rel;
  r.depth_rmse = depth.rmse;
  r.mae = depth.mae;
  r.delta1 = depth.delta1_percent;
  r.valid_pixel_count = std::max(disp.count, depth.count);
  return r;
}

double& MetricField(MetricReport& r, int column) {
  switch (column) {
    case 0: return r.epe;
    case 1: return r.disp_rmse;
    case 2: return r.bad3;
    case 3: return r.abs_rel;
    case 4: return r.depth_rmse;
    case 5: return r.mae;
    case 6: return r.delta1;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "metric column " + std::to_string(column) + " out of range");
}

double MetricField(const MetricReport& r, int column) {
  return MetricField(const_cast<MetricReport&>(r), column);
}

AggregateResult Aggregate(std::vector<SequenceReport> reports,
                          AggregationMode mode) {
  AggregateResult result;
  result.rows = std::move(reports);
  if (result.rows.empty()) {
    throw Error(ErrorCode::kEmptyOverlap, "nothing to aggregate");
  }
  double total_weight = 0.0;
  for (const auto& [name, r] : result.rows) {
    const double w = mode == AggregationMode::kPixelWeighted
                         ? static_cast<double>(r.valid_pixel_count)
                         : 1.0;
    total_weight += w;
    for (int c = 0; c < kMetricColumnCount; ++c) {
      MetricField(result.mean, c) += w * MetricField(r, c);
    }
    result.mean.valid_pixel_count += r.valid_pixel_count;
  }
  if (!(total_weight > 0.0)) {
    throw Error(ErrorCode::kEmptyOverlap, "aggregation weights sum to zero");
  }
  for (int c = 0; c < kMetricColumnCount; ++c) {
    MetricField(result.mean, c) /= total_weight;
  }
  for (const auto& [name, r] : result.rows) {
    const double w = mode == AggregationMode::kPixelWeighted
                         ? static_cast<double>(r.valid_pixel_count)
                         : 1.0;
    for (int c = 0; c < kMetricColumnCount; ++c) {
      const double d = MetricField(r, c) - MetricField(result.mean, c);
      MetricField(result.variance, c) += w * d * d;
    }
  }
  for (int c = 0; c < kMetricColumnCount; ++c) {
    MetricField(result.variance, c) /= total_weight;
  }
  result.variance.valid_pixel_count = result.mean.valid_pixel_count;
  return result;
}

namespace {

void WriteRow(std::ostream& out, const std::string& name,
              const MetricReport& r) {
  out << name;
  for (int c = 0; c < kMetricColumnCount; ++c) {
    std::string cell = detail::FormatFixed(MetricField(r, c), 3);
    if (cell == "-0.000") cell = "0.000";
    out << ',' << cell;
  }
  out << '\n';
}

}  // namespace

void WriteMetricsCsv(std::ostream& out, const AggregateResult& result) {
  out << "sequence";
  for (const char* col : kMetricColumns) out << ',' << col;
  out << '\n';
  for (const auto& [name, r] : result.rows) WriteRow(out, name, r);
  WriteRow(out, "mean", result.mean);
  WriteRow(out, "variance", result.variance);
}

std::vector<SequenceReport> ReadMetricsCsv(std::istream& in) {
  std::vector<SequenceReport> rows;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::IsCommentOrBlank(line)) continue;
    const auto cells = detail::SplitChar(detail::Trim(line), ',');
    if (!header_seen) {
      header_seen = true;
      bool ok = cells.size() == 1 + kMetricColumnCount && cells[0] == "sequence";
      for (int c = 0; ok && c < kMetricColumnCount; ++c) {
        ok = cells[1 + c] == kMetricColumns[c];
      }
      if (!ok) {
        throw Error(ErrorCode::kMalformedLine,
                    "metrics CSV header must be sequence," +
                        std::string("epe,disp_rmse,bad3,abs_rel,depth_rmse,mae,"
                                    "delta1"));
      }
      continue;
    }
    if (cells.size() != 1 + kMetricColumnCount) {
      throw Error(ErrorCode::kMalformedLine,
                  "metrics CSV line " + std::to_string(line_no) +
                      ": expected 8 cells");
    }
    if (cells[0] == "mean" || cells[0] == "variance") continue;
    MetricReport r;
    for (int c = 0; c < kMetricColumnCount; ++c) {
      const auto v = detail::ParseNumber<double>(cells[1 + c]);
      if (!v) {
        throw Error(ErrorCode::kMalformedLine,
                    "metrics CSV line " + std::to_string(line_no) +
                        ": bad number '" + std::string(cells[1 + c]) + "'");
      }
      MetricField(r, c) = *v;
    }
    rows.emplace_back(std::string(cells[0]), r);
  }
  return rows;
}

}  // namespace sfmscale
