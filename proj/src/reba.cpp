#include "ergoseg/reba.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace ergoseg {

void Thresholds::validate() const {
  if (!(zero > 0.0) || !(binary > 0.0) || !(abduction > 0.0))
    fail(Errc::config_error, "thresholds must be positive");
  if (abduction < binary)
    fail(Errc::config_error, "abduction threshold must be >= binary threshold");
}

void Adjustments::validate() const {
  for (const int v : {load_score, coupling_score, activity_score})
    if (v < 0 || v > 3)
      fail(Errc::config_error, "adjustment scores must be in 0..3");
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  const char* p = text.c_str();
  while (*p) {
    char* next = nullptr;
    const double v = std::strtod(p, &next);
    if (next == p) {
      if (*p == ' ' || *p == '\t') {
        ++p;
        continue;
      }
      fail(Errc::config_error, "bad number in table row: '" + text + "'");
    }
    out.push_back(v);
    p = next;
  }
  return out;
}

int bin_score(const std::vector<BinRule>& bins, double angle, const char* part) {
  for (const auto& rule : bins)
    if (angle >= rule.lo && angle <= rule.hi) return rule.score;
  fail(Errc::config_error, std::string("no bin covers angle for ") + part);
}

// Values below the threshold are treated as exactly neutral.
double snap(double angle, double threshold) {
  return std::abs(angle) < threshold ? 0.0 : angle;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

void RebaTables::validate() const {
  const struct {
    const std::vector<BinRule>& bins;
    bool is_signed;
    const char* part;
  } parts[] = {
      {trunk_bins, true, "trunk"},         {neck_bins, true, "neck"},
      {legs_bins, false, "legs"},          {upper_arm_bins, true, "upper_arm"},
      {lower_arm_bins, false, "lower_arm"}, {wrist_bins, false, "wrist"},
  };
  for (const auto& p : parts) {
    if (p.bins.empty())
      fail(Errc::config_error, std::string("missing bins for ") + p.part);
    const double lo = p.is_signed ? -180.0 : 0.0;
    for (double angle = lo; angle <= 180.0; angle += 0.5)
      bin_score(p.bins, angle, p.part);
  }
  for (const auto& slice : table_a)
    for (const auto& row : slice)
      for (const int v : row)
        if (v < 1 || v > 9) fail(Errc::config_error, "table_a value out of 1..9");
  for (const auto& slice : table_b)
    for (const auto& row : slice)
      for (const int v : row)
        if (v < 1 || v > 9) fail(Errc::config_error, "table_b value out of 1..9");
  for (int a = 0; a < 12; ++a)
    for (int b = 0; b < 12; ++b) {
      const int v = table_c[a][b];
      if (v < 1 || v > 12) fail(Errc::config_error, "table_c value out of 1..12");
      if (a > 0 && table_c[a - 1][b] > v)
        fail(Errc::config_error, "table_c is not monotone along score_a");
      if (b > 0 && table_c[a][b - 1] > v)
        fail(Errc::config_error, "table_c is not monotone along score_b");
    }
}

RebaTables RebaTables::parse(std::istream& in) {
  RebaTables tables;
  std::string section;
  std::string line;
  while (std::getline(in, line)) {
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    if (stripped.front() == '[' && stripped.back() == ']') {
      section = stripped.substr(1, stripped.size() - 2);
      continue;
    }
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      fail(Errc::config_error, "table row missing '=': " + stripped);
    const std::vector<double> lhs = parse_numbers(stripped.substr(0, eq));
    const std::vector<double> rhs = parse_numbers(stripped.substr(eq + 1));

    const auto bin_section = [&](std::vector<BinRule>& bins) {
      if (lhs.size() != 2 || rhs.size() != 1)
        fail(Errc::config_error, "bin rows are 'lo hi = score': " + stripped);
      bins.push_back({lhs[0], lhs[1], static_cast<int>(rhs[0])});
    };
    if (section == "bins.trunk") bin_section(tables.trunk_bins);
    else if (section == "bins.neck") bin_section(tables.neck_bins);
    else if (section == "bins.legs") bin_section(tables.legs_bins);
    else if (section == "bins.upper_arm") bin_section(tables.upper_arm_bins);
    else if (section == "bins.lower_arm") bin_section(tables.lower_arm_bins);
    else if (section == "bins.wrist") bin_section(tables.wrist_bins);
    else if (section == "table_a") {
      if (lhs.size() != 2 || rhs.size() != 4)
        fail(Errc::config_error, "table_a rows are 'neck trunk = v1 v2 v3 v4'");
      const int neck = static_cast<int>(lhs[0]), trunk = static_cast<int>(lhs[1]);
      if (neck < 1 || neck > 3 || trunk < 1 || trunk > 5)
        fail(Errc::config_error, "table_a index out of range");
      for (int legs = 1; legs <= 4; ++legs)
        tables.table_a[neck - 1][legs - 1][trunk - 1] =
            static_cast<int>(rhs[static_cast<std::size_t>(legs - 1)]);
    } else if (section == "table_b") {
      if (lhs.size() != 2 || rhs.size() != 3)
        fail(Errc::config_error, "table_b rows are 'lower upper = v1 v2 v3'");
      const int lower = static_cast<int>(lhs[0]), upper = static_cast<int>(lhs[1]);
      if (lower < 1 || lower > 2 || upper < 1 || upper > 6)
        fail(Errc::config_error, "table_b index out of range");
      for (int wrist = 1; wrist <= 3; ++wrist)
        tables.table_b[lower - 1][wrist - 1][upper - 1] =
            static_cast<int>(rhs[static_cast<std::size_t>(wrist - 1)]);
    } else if (section == "table_c") {
      if (lhs.size() != 1 || rhs.size() != 12)
        fail(Errc::config_error, "table_c rows are 'a = 12 values'");
      const int a = static_cast<int>(lhs[0]);
      if (a < 1 || a > 12) fail(Errc::config_error, "table_c index out of range");
      for (int b = 1; b <= 12; ++b)
        tables.table_c[a - 1][b - 1] =
            static_cast<int>(rhs[static_cast<std::size_t>(b - 1)]);
    } else {
      fail(Errc::config_error, "unknown table section '" + section + "'");
    }
  }
  tables.validate();
  return tables;
}

const RebaTables& RebaTables::defaults() {
  static const RebaTables tables = [] {
    std::istringstream in(default_text());
    return parse(in);
  }();
  return tables;
}

PartScores score_parts(const PostureAngles& angles, const Thresholds& thresholds,
                       const RebaTables& tables) {
  thresholds.validate();

  const double trunk_flexion = snap(angles.trunk_flexion, thresholds.zero);
  const double side = snap(angles.trunk_side_flexion, thresholds.binary);
  const double twist = snap(angles.trunk_twist, thresholds.binary);
  const bool trunk_twisted = twist > 0.0;

  PartScores scores;
  scores.trunk = bin_score(tables.trunk_bins, trunk_flexion, "trunk");
  if (side > 0.0 || trunk_twisted) scores.trunk = std::min(scores.trunk + 1, 5);

  const double neck_flexion = snap(angles.neck_flexion, thresholds.zero);
  scores.neck = bin_score(tables.neck_bins, neck_flexion, "neck");
  // Neck twist is not measurable; it follows the trunk twist flag.
  if (trunk_twisted) scores.neck = std::min(scores.neck + 1, 3);

  const double knee =
      std::max(angles.knee_flexion_left, angles.knee_flexion_right);
  scores.legs = bin_score(tables.legs_bins, knee, "legs");

  const auto upper_arm_side = [&](double flexion, double abduction) {
    int score = bin_score(tables.upper_arm_bins, flexion, "upper_arm");
    if (snap(abduction, thresholds.abduction) > 0.0) score = std::min(score + 1, 6);
    return score;
  };
  scores.upper_arm = std::max(
      upper_arm_side(angles.upper_arm_flexion_left, angles.shoulder_abduction_left),
      upper_arm_side(angles.upper_arm_flexion_right,
                     angles.shoulder_abduction_right));

  scores.lower_arm = std::max(
      bin_score(tables.lower_arm_bins, angles.lower_arm_flexion_left, "lower_arm"),
      bin_score(tables.lower_arm_bins, angles.lower_arm_flexion_right, "lower_arm"));

  scores.wrist = std::max(
      bin_score(tables.wrist_bins, angles.wrist_flexion_left, "wrist"),
      bin_score(tables.wrist_bins, angles.wrist_flexion_right, "wrist"));
  return scores;
}

FrameScore frame_reba(const PartScores& parts, const Adjustments& adjustments,
                      const RebaTables& tables) {
  adjustments.validate();
  const int score_a =
      tables.table_a[parts.neck - 1][parts.legs - 1][parts.trunk - 1] +
      adjustments.load_score;
  const int score_b =
      tables.table_b[parts.lower_arm - 1][parts.wrist - 1][parts.upper_arm - 1] +
      adjustments.coupling_score;
  const int c = tables.table_c[std::min(score_a, 12) - 1][std::min(score_b, 12) - 1];
  FrameScore out;
  out.value = std::min(c + adjustments.activity_score, 15);
  out.parts = parts;
  return out;
}

std::vector<FrameScore> score_sequence(const std::vector<PostureAngles>& angles,
                                       const Thresholds& thresholds,
                                       const RebaTables& tables,
                                       const Adjustments& adjustments) {
  std::vector<FrameScore> out;
  out.reserve(angles.size());
  for (const auto& frame : angles)
    out.push_back(frame_reba(score_parts(frame, thresholds, tables), adjustments,
                             tables));
  return out;
}

std::vector<FrameScore> score_sequence(const std::vector<PostureAngles>& angles,
                                       const Thresholds& thresholds,
                                       const RebaTables& tables,
                                       const std::vector<Adjustments>& per_frame) {
  if (per_frame.size() != angles.size())
    fail(Errc::length_mismatch, "one adjustment set per frame required");
  std::vector<FrameScore> out;
  out.reserve(angles.size());
  for (std::size_t f = 0; f < angles.size(); ++f)
    out.push_back(frame_reba(score_parts(angles[f], thresholds, tables),
                             per_frame[f], tables));
  return out;
}

namespace {

void check_video_inputs(const std::vector<std::vector<double>>& video_scores,
                        const std::vector<AnnotationTrack>& annotations) {
  if (video_scores.size() != annotations.size())
    fail(Errc::length_mismatch, "score and annotation video counts differ");
  if (video_scores.empty())
    fail(Errc::empty_input, "no videos to aggregate");
  for (std::size_t v = 0; v < video_scores.size(); ++v)
    if (static_cast<std::int64_t>(video_scores[v].size()) !=
        annotations[v].total_frames)
      fail(Errc::length_mismatch,
           "video " + std::to_string(v) + ": scores cover " +
               std::to_string(video_scores[v].size()) + " frames, annotations " +
               std::to_string(annotations[v].total_frames));
}

}  // namespace

std::map<std::string, ActionRisk> aggregate_median(
    const std::vector<std::vector<double>>& video_scores,
    const std::vector<AnnotationTrack>& annotations, const LabelSet& labels) {
  check_video_inputs(video_scores, annotations);

  // per class id, per video: scores of frames with that label
  std::vector<std::vector<double>> video_medians(
      static_cast<std::size_t>(labels.size()));
  for (std::size_t v = 0; v < video_scores.size(); ++v) {
    std::vector<std::vector<double>> per_class(
        static_cast<std::size_t>(labels.size()));
    for (const auto& span : annotations[v].spans)
      for (std::int64_t f = span.start; f <= span.end; ++f)
        per_class[static_cast<std::size_t>(span.class_id)].push_back(
            video_scores[v][static_cast<std::size_t>(f)]);
    for (std::size_t c = 0; c < per_class.size(); ++c)
      if (!per_class[c].empty())
        video_medians[c].push_back(median(std::move(per_class[c])));
  }

  std::map<std::string, ActionRisk> out;
  for (int c = 0; c < labels.size(); ++c) {
    auto& samples = video_medians[static_cast<std::size_t>(c)];
    const std::string canonical = labels.labels[static_cast<std::size_t>(c)].canonical();
    if (samples.empty())
      fail(Errc::action_missing,
           "action '" + canonical + "' appears in no video");
    const double score = median(std::move(samples));
    out.emplace(canonical, ActionRisk{score, risk_category(score)});
  }
  return out;
}

std::map<std::string, ActionRisk> aggregate_resample_max(
    const std::vector<std::vector<double>>& video_scores,
    const std::vector<AnnotationTrack>& annotations, const LabelSet& labels) {
  check_video_inputs(video_scores, annotations);

  std::vector<std::vector<double>> video_averages(
      static_cast<std::size_t>(labels.size()));
  for (std::size_t v = 0; v < video_scores.size(); ++v) {
    const std::vector<double> scores = downsample_to_100(video_scores[v]);
    const std::vector<int> frame_labels =
        downsample_to_100(to_frame_labels(annotations[v]));
    std::vector<double> sums(static_cast<std::size_t>(labels.size()), 0.0);
    std::vector<int> counts(static_cast<std::size_t>(labels.size()), 0);
    for (std::size_t k = 0; k < 100; ++k) {
      sums[static_cast<std::size_t>(frame_labels[k])] += scores[k];
      counts[static_cast<std::size_t>(frame_labels[k])] += 1;
    }
    for (std::size_t c = 0; c < sums.size(); ++c)
      if (counts[c] > 0)
        video_averages[c].push_back(sums[c] / counts[c]);
  }

  std::map<std::string, ActionRisk> out;
  for (int c = 0; c < labels.size(); ++c) {
    const auto& samples = video_averages[static_cast<std::size_t>(c)];
    const std::string canonical = labels.labels[static_cast<std::size_t>(c)].canonical();
    if (samples.empty())
      fail(Errc::action_missing,
           "action '" + canonical + "' appears in no video after resampling");
    const double score = *std::max_element(samples.begin(), samples.end());
    out.emplace(canonical, ActionRisk{score, risk_category(score)});
  }
  return out;
}

}  // namespace ergoseg
