#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ergoseg/error.hpp"
#include "ergoseg/kinematics.hpp"
#include "ergoseg/labels.hpp"
#include "ergoseg/risk.hpp"

namespace ergoseg {

struct Thresholds {
  double zero = 5.0;       // trunk/neck bending below this is no bending
  double binary = 10.0;    // twist / side flexion gate
  double abduction = 30.0; // shoulder abduction gate

  void validate() const;
};

struct PartScores {
  int trunk = 1;      // 1-5
  int neck = 1;       // 1-3
  int legs = 1;       // 1-4
  int upper_arm = 1;  // 1-6
  int lower_arm = 1;  // 1-2
  int wrist = 1;      // 1-3

  bool operator==(const PartScores& o) const = default;
};

struct Adjustments {
  int load_score = 0;      // 0-3
  int coupling_score = 0;  // 0-3
  int activity_score = 0;  // 0-3

  void validate() const;
};

// First matching [lo, hi] interval wins.
struct BinRule {
  double lo = 0.0;
  double hi = 0.0;
  int score = 1;
};

struct RebaTables {
  std::vector<BinRule> trunk_bins;
  std::vector<BinRule> neck_bins;
  std::vector<BinRule> legs_bins;
  std::vector<BinRule> upper_arm_bins;
  std::vector<BinRule> lower_arm_bins;
  std::vector<BinRule> wrist_bins;
  int table_a[3][4][5] = {};  // [neck-1][legs-1][trunk-1] -> 1-9
  int table_b[2][3][6] = {};  // [lower_arm-1][wrist-1][upper_arm-1] -> 1-9
  int table_c[12][12] = {};   // [score_a-1][score_b-1] -> 1-12

  void validate() const;

  static const RebaTables& defaults();
  static RebaTables parse(std::istream& in);
  static const char* default_text();
};

struct FrameScore {
  int value = 1;  // 1-15
  PartScores parts;
};

PartScores score_parts(const PostureAngles& angles, const Thresholds& thresholds,
                       const RebaTables& tables);

FrameScore frame_reba(const PartScores& parts, const Adjustments& adjustments,
                      const RebaTables& tables);

std::vector<FrameScore> score_sequence(const std::vector<PostureAngles>& angles,
                                       const Thresholds& thresholds,
                                       const RebaTables& tables,
                                       const Adjustments& adjustments = {});

// Per-frame adjustments, e.g. looked up from the frame's action label.
std::vector<FrameScore> score_sequence(const std::vector<PostureAngles>& angles,
                                       const Thresholds& thresholds,
                                       const RebaTables& tables,
                                       const std::vector<Adjustments>& per_frame);

// Keeps one element per constant stride of floor(n/100); requires n >= 100.
template <typename T>
std::vector<T> downsample_to_100(const std::vector<T>& seq) {
  if (seq.size() < 100)
    fail(Errc::too_short, "sequence of " + std::to_string(seq.size()) +
                              " elements cannot be reduced to 100");
  const std::size_t step = seq.size() / 100;
  std::vector<T> out;
  out.reserve(100);
  for (std::size_t k = 0; k < 100; ++k) out.push_back(seq[k * step]);
  return out;
}

struct ActionRisk {
  double score = 0.0;
  RiskCategory category = RiskCategory::low;
};

// Median over frames within each video, then median over the per-video
// medians, per action.
std::map<std::string, ActionRisk> aggregate_median(
    const std::vector<std::vector<double>>& video_scores,
    const std::vector<AnnotationTrack>& annotations, const LabelSet& labels);

// Downsamples each video to 100 frames, averages per action within the
// video, and keeps the maximum average across videos.
std::map<std::string, ActionRisk> aggregate_resample_max(
    const std::vector<std::vector<double>>& video_scores,
    const std::vector<AnnotationTrack>& annotations, const LabelSet& labels);

}  // namespace ergoseg
