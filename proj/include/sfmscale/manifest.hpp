#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace sfmscale {

// `<dataset>_<keyframe>`, e.g. "2_4".
struct SequenceId {
  int dataset = 0;
  int keyframe = 0;

  std::string ToString() const;
  // Throws kInvalidArgument on anything but two positive integers joined by '_'.
  static SequenceId Parse(std::string_view text);

  auto operator<=>(const SequenceId&) const = default;
};

// Datasets 4 and 5 are never part of a manifest.
bool IsExcludedDataset(int dataset);

struct SplitAssignment {
  std::vector<SequenceId> train;
  std::vector<SequenceId> validation;
};

// 12 train and 13 validation sequences.
SplitAssignment DefaultSplit();

// CSV lines `split,sequence` with an optional `split,sequence` header.
SplitAssignment ReadSplitAssignment(std::istream& in);

struct ManifestEntry {
  SequenceId sequence;
  std::vector<std::string> frames;

  bool operator==(const ManifestEntry&) const = default;
};

struct SplitManifest {
  std::vector<ManifestEntry> train;
  std::vector<ManifestEntry> validation;

  std::size_t train_total() const;
  std::size_t validation_total() const;
  std::size_t grand_total() const { return train_total() + validation_total(); }

  bool operator==(const SplitManifest&) const = default;
};

using SequenceFrames = std::map<SequenceId, std::vector<std::string>>;

// Assigns each sequence's frames to its split. Frames equal to the sequence's
// anchor (keyframe) name are dropped; sequences without an assignment are
// ignored; assigned sequences without frames get an empty entry.
SplitManifest BuildManifest(
    const SequenceFrames& frames, const SplitAssignment& assignment,
    const std::map<SequenceId, std::string>& anchor_names = {});

// manifest.csv: header `split,sequence,frame_name`, one row per frame.
void WriteManifestCsv(std::ostream& out, const SplitManifest& manifest);
SplitManifest ReadManifestCsv(std::istream& in);

// summary.json with per-sequence counts and split totals.
std::string ManifestSummaryJson(const SplitManifest& manifest);

}  // namespace sfmscale
