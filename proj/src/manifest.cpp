#include "sfmscale/manifest.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "sfmscale/error.hpp"
#include "text_util.hpp"

namespace sfmscale {

std::string SequenceId::ToString() const {
  return std::to_string(dataset) + "_" + std::to_string(keyframe);
}

SequenceId SequenceId::Parse(std::string_view text) {
  const auto parts = detail::SplitChar(text, '_');
  if (parts.size() == 2) {
    const auto d = detail::ParseNumber<int>(parts[0]);
    const auto k = detail::ParseNumber<int>(parts[1]);
    if (d && k && *d > 0 && *k > 0) return {*d, *k};
  }
  throw Error(ErrorCode::kInvalidArgument,
              "sequence id '" + std::string(text) +
                  "' is not of the form <dataset>_<keyframe>");
}

bool IsExcludedDataset(int dataset) { return dataset == 4 || dataset == 5; }

SplitAssignment DefaultSplit() {
  SplitAssignment s;
  s.train = {{1, 1}, {1, 3}, {2, 2}, {2, 4}, {3, 1}, {3, 2},
             {3, 3}, {6, 1}, {6, 2}, {6, 3}, {7, 1}, {7, 4}};
  s.validation = {{1, 2}, {1, 4}, {1, 5}, {2, 1}, {2, 3}, {2, 5}, {3, 4},
                  {3, 5}, {6, 4}, {6, 5}, {7, 2}, {7, 3}, {7, 5}};
  return s;
}

SplitAssignment ReadSplitAssignment(std::istream& in) {
  SplitAssignment s;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::IsCommentOrBlank(line)) continue;
    const auto cells = detail::SplitChar(detail::Trim(line), ',');
    if (cells.size() != 2) {
      throw Error(ErrorCode::kMalformedLine,
                  "split file line " + std::to_string(line_no) +
                      ": expected `split,sequence`");
    }
    if (cells[0] == "split" && cells[1] == "sequence") continue;
    const SequenceId id = SequenceId::Parse(cells[1]);
    if (cells[0] == "train") {
      s.train.push_back(id);
    } else if (cells[0] == "validation") {
      s.validation.push_back(id);
    } else {
      throw Error(ErrorCode::kMalformedLine,
                  "split file line " + std::to_string(line_no) +
                      ": unknown split '" + std::string(cells[0]) + "'");
    }
  }
  return s;
}

namespace {

std::size_t Total(const std::vector<ManifestEntry>& entries) {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.frames.size();
  return n;
}

void CheckExcluded(const SequenceId& id) {
  if (IsExcludedDataset(id.dataset)) {
    throw Error(ErrorCode::kExcludedDataset,
                "sequence " + id.ToString() + " belongs to excluded dataset " +
                    std::to_string(id.dataset));
  }
}

}  // namespace

std::size_t SplitManifest::train_total() const { return Total(train); }
std::size_t SplitManifest::validation_total() const {
  return Total(validation);
}

SplitManifest BuildManifest(
    const SequenceFrames& frames, const SplitAssignment& assignment,
    const std::map<SequenceId, std::string>& anchor_names) {
  std::set<SequenceId> seen;
  for (const auto* split : {&assignment.train, &assignment.validation}) {
    std::set<SequenceId> within;
    for (const auto& id : *split) {
      CheckExcluded(id);
      if (!within.insert(id).second) continue;
      if (!seen.insert(id).second) {
        throw Error(ErrorCode::kOverlappingSplits,
                    "sequence " + id.ToString() +
                        " is assigned to both train and validation");
      }
    }
  }
  for (const auto& [id, list] : frames) CheckExcluded(id);

  const auto fill = [&](const std::vector<SequenceId>& ids) {
    std::vector<ManifestEntry> out;
    std::set<SequenceId> done;
    for (const auto& id : ids) {
      if (!done.insert(id).second) continue;
      ManifestEntry entry{id, {}};
      if (const auto it = frames.find(id); it != frames.end()) {
        const auto anchor = anchor_names.find(id);
        for (const auto& name : it->second) {
          if (anchor != anchor_names.end() && name == anchor->second) continue;
          entry.frames.push_back(name);
        }
      }
      out.push_back(std::move(entry));
    }
    return out;
  };
  return {fill(assignment.train), fill(assignment.validation)};
}

void WriteManifestCsv(std::ostream& out, const SplitManifest& manifest) {
  out << "split,sequence,frame_name\n";
  const auto emit = [&](const char* split,
                        const std::vector<ManifestEntry>& entries) {
    for (const auto& e : entries) {
      const std::string seq = e.sequence.ToString();
      for (const auto& f : e.frames) out << split << ',' << seq << ',' << f << '\n';
    }
  };
  emit("train", manifest.train);
  emit("validation", manifest.validation);
}

SplitManifest ReadManifestCsv(std::istream& in) {
  SplitManifest m;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::IsCommentOrBlank(line)) continue;
    const auto trimmed = detail::Trim(line);
    if (!header_seen) {
      header_seen = true;
      if (trimmed != "split,sequence,frame_name") {
        throw Error(ErrorCode::kMalformedLine,
                    "manifest header must be split,sequence,frame_name");
      }
      continue;
    }
    // Frame names may contain commas; only the first two separate fields.
    const auto c1 = trimmed.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : trimmed.find(',', c1 + 1);
    if (c2 == std::string_view::npos) {
      throw Error(ErrorCode::kMalformedLine,
                  "manifest line " + std::to_string(line_no) +
                      ": expected split,sequence,frame_name");
    }
    const auto split = trimmed.substr(0, c1);
    const SequenceId id = SequenceId::Parse(trimmed.substr(c1 + 1, c2 - c1 - 1));
    std::vector<ManifestEntry>* target = nullptr;
    if (split == "train") {
      target = &m.train;
    } else if (split == "validation") {
      target = &m.validation;
    } else {
      throw Error(ErrorCode::kMalformedLine,
                  "manifest line " + std::to_string(line_no) +
                      ": unknown split '" + std::string(split) + "'");
    }
    auto it = std::find_if(target->begin(), target->end(),
                           [&](const ManifestEntry& e) { return e.sequence == id; });
    if (it == target->end()) {
      target->push_back({id, {}});
      it = target->end() - 1;
    }
    it->frames.emplace_back(trimmed.substr(c2 + 1));
  }
  return m;
}

std::string ManifestSummaryJson(const SplitManifest& manifest) {
  // ordered_json keeps the split's sequence order in the output.
  using nlohmann::ordered_json;
  const auto split_json = [](const std::vector<ManifestEntry>& entries) {
    ordered_json seqs = ordered_json::object();
    for (const auto& e : entries) seqs[e.sequence.ToString()] = e.frames.size();
    return ordered_json{{"sequences", seqs}, {"total", Total(entries)}};
  };
  ordered_json j;
  j["train"] = split_json(manifest.train);
  j["validation"] = split_json(manifest.validation);
  j["grand_total"] = manifest.grand_total();
  return j.dump(2) + "\n";
}

}  // namespace sfmscale
