#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ergoseg/risk.hpp"

namespace ergoseg {

// Hierarchical action label; canonical form joins tiers with '/'.
struct ActionLabel {
  std::vector<std::string> tiers;

  std::string canonical() const;
  static ActionLabel from_canonical(const std::string& canonical);
  bool operator==(const ActionLabel& o) const = default;
};

struct LabelSet {
  std::vector<ActionLabel> labels;
  std::unordered_map<std::string, int> index;

  int size() const { return static_cast<int>(labels.size()); }
  int id_of(const std::string& canonical) const;  // throws UnknownLabel
  void add(const ActionLabel& label);

  // One canonical label per line; order defines class ids.
  static LabelSet from_stream(std::istream& in);
  std::string to_text() const;
};

LabelSet default_labels_uw_iom();  // 17 four-tier labels
LabelSet default_labels_tum();     // 21 two-tier labels

struct AnnotationSpan {
  std::int64_t start = 0;  // inclusive
  std::int64_t end = 0;    // inclusive
  int class_id = 0;
};

// Sorted, contiguous, non-overlapping cover of [0, total_frames).
struct AnnotationTrack {
  std::vector<AnnotationSpan> spans;
  std::int64_t total_frames = 0;
};

// Rows of "start,end,label"; validates sortedness, overlap, and gaps.
AnnotationTrack parse_annotations(std::istream& in, const LabelSet& labels);

std::vector<int> to_frame_labels(const AnnotationTrack& track);

struct SegmentRun {
  // (class id, length)
  std::vector<std::pair<int, std::int64_t>> runs;

  std::int64_t total_frames() const;
};

SegmentRun run_length_encode(const std::vector<int>& frames);
std::vector<int> run_length_decode(const SegmentRun& runs);

// Joins the label set with per-action risk categories.
std::map<int, RiskCategory> attach_risk(
    const LabelSet& labels, const std::map<std::string, RiskCategory>& risk);

}  // namespace ergoseg
