#include "ergoseg/labels.hpp"

#include <cstdlib>
#include <istream>
#include <sstream>

#include "ergoseg/error.hpp"

namespace ergoseg {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

RiskCategory parse_risk(const std::string& name) {
  if (name == "Low") return RiskCategory::low;
  if (name == "Medium") return RiskCategory::medium;
  if (name == "High") return RiskCategory::high;
  fail(Errc::config_error, "unknown risk category '" + name + "'");
}

std::string ActionLabel::canonical() const {
  std::string out;
  for (std::size_t i = 0; i < tiers.size(); ++i) {
    if (i > 0) out += '/';
    out += tiers[i];
  }
  return out;
}

ActionLabel ActionLabel::from_canonical(const std::string& canonical) {
  ActionLabel label;
  std::size_t start = 0;
  while (start <= canonical.size()) {
    std::size_t end = canonical.find('/', start);
    if (end == std::string::npos) end = canonical.size();
    label.tiers.push_back(canonical.substr(start, end - start));
    if (end == canonical.size()) break;
    start = end + 1;
  }
  if (label.tiers.empty() || label.tiers.size() > 4)
    fail(Errc::unknown_label, "label must have 1-4 tiers: '" + canonical + "'");
  for (const auto& tier : label.tiers)
    if (tier.empty())
      fail(Errc::unknown_label, "label has an empty tier: '" + canonical + "'");
  return label;
}

int LabelSet::id_of(const std::string& canonical) const {
  const auto it = index.find(canonical);
  if (it == index.end())
    fail(Errc::unknown_label, "label '" + canonical + "' is not in the label set");
  return it->second;
}

void LabelSet::add(const ActionLabel& label) {
  const std::string canonical = label.canonical();
  if (index.count(canonical))
    fail(Errc::unknown_label, "duplicate label '" + canonical + "'");
  index.emplace(canonical, static_cast<int>(labels.size()));
  labels.push_back(label);
}

LabelSet LabelSet::from_stream(std::istream& in) {
  LabelSet set;
  std::string line;
  while (std::getline(in, line)) {
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    set.add(ActionLabel::from_canonical(stripped));
  }
  if (set.labels.empty()) fail(Errc::empty_input, "label set is empty");
  return set;
}

std::string LabelSet::to_text() const {
  std::string out;
  for (const auto& label : labels) out += label.canonical() + "\n";
  return out;
}

namespace {

LabelSet from_canonical_list(std::initializer_list<const char*> names) {
  LabelSet set;
  for (const char* name : names) set.add(ActionLabel::from_canonical(name));
  return set;
}

}  // namespace

LabelSet default_labels_uw_iom() {
  // tiers: object / motion / manipulation / surface height
  return from_canonical_list({
      "box/bend/reach/low",
      "box/bend/pick-up/low",
      "box/bend/place/low",
      "box/stand/reach/medium",
      "box/stand/pick-up/medium",
      "box/stand/place/medium",
      "box/stand/reach/high",
      "box/stand/pick-up/high",
      "box/stand/place/high",
      "box/walk/hold/none",
      "rod/bend/pick-up/low",
      "rod/bend/place/low",
      "rod/stand/pick-up/medium",
      "rod/stand/place/medium",
      "rod/stand/pick-up/high",
      "rod/stand/place/high",
      "none/walk/none/none",
  });
}

LabelSet default_labels_tum() {
  // tiers: motion verb / location or hold mode
  return from_canonical_list({
      "close/cabinet",
      "close/drawer",
      "open/cabinet",
      "open/drawer",
      "reach/cabinet",
      "reach/drawer",
      "reach/do-not-hold",
      "twist/cabinet",
      "twist/drawer",
      "pick-up/hold-one-hand",
      "pick-up/hold-both-hands",
      "place/hold-one-hand",
      "place/hold-both-hands",
      "stand/do-not-hold",
      "stand/hold-one-hand",
      "stand/hold-both-hands",
      "walk/do-not-hold",
      "walk/hold-one-hand",
      "walk/hold-both-hands",
      "twist/do-not-hold",
      "place/do-not-hold",
  });
}

AnnotationTrack parse_annotations(std::istream& in, const LabelSet& labels) {
  AnnotationTrack track;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;

    const std::size_t c1 = stripped.find(',');
    const std::size_t c2 = c1 == std::string::npos ? std::string::npos
                                                   : stripped.find(',', c1 + 1);
    if (c2 == std::string::npos)
      fail(Errc::unknown_label, "annotation line " + std::to_string(line_no) +
                                    " is not 'start,end,label'");
    char* stop = nullptr;
    const std::string start_text = trim(stripped.substr(0, c1));
    const std::string end_text = trim(stripped.substr(c1 + 1, c2 - c1 - 1));
    AnnotationSpan span;
    span.start = std::strtoll(start_text.c_str(), &stop, 10);
    if (stop != start_text.c_str() + start_text.size())
      fail(Errc::unknown_label,
           "bad start frame on line " + std::to_string(line_no));
    span.end = std::strtoll(end_text.c_str(), &stop, 10);
    if (stop != end_text.c_str() + end_text.size())
      fail(Errc::unknown_label,
           "bad end frame on line " + std::to_string(line_no));
    span.class_id = labels.id_of(trim(stripped.substr(c2 + 1)));
    if (span.start < 0 || span.end < span.start)
      fail(Errc::unknown_label,
           "bad span on line " + std::to_string(line_no));
    track.spans.push_back(span);
  }
  if (track.spans.empty()) fail(Errc::empty_input, "annotation file is empty");

  for (std::size_t i = 1; i < track.spans.size(); ++i)
    if (track.spans[i].start < track.spans[i - 1].start)
      fail(Errc::unsorted_error,
           "spans are not sorted by start frame (span " + std::to_string(i) + ")");
  if (track.spans.front().start != 0)
    fail(Errc::gap_error, "frames 0-" +
                              std::to_string(track.spans.front().start - 1) +
                              " are not covered");
  for (std::size_t i = 1; i < track.spans.size(); ++i) {
    const std::int64_t previous_end = track.spans[i - 1].end;
    const std::int64_t start = track.spans[i].start;
    if (start <= previous_end)
      fail(Errc::overlap_error,
           "span " + std::to_string(i) + " overlaps the previous span");
    if (start > previous_end + 1)
      fail(Errc::gap_error, "frames " + std::to_string(previous_end + 1) + "-" +
                                std::to_string(start - 1) + " are not covered");
  }
  track.total_frames = track.spans.back().end + 1;
  return track;
}

std::vector<int> to_frame_labels(const AnnotationTrack& track) {
  std::vector<int> frames(static_cast<std::size_t>(track.total_frames));
  for (const auto& span : track.spans)
    for (std::int64_t f = span.start; f <= span.end; ++f)
      frames[static_cast<std::size_t>(f)] = span.class_id;
  return frames;
}

std::int64_t SegmentRun::total_frames() const {
  std::int64_t total = 0;
  for (const auto& [id, length] : runs) total += length;
  return total;
}

SegmentRun run_length_encode(const std::vector<int>& frames) {
  if (frames.empty()) fail(Errc::empty_input, "cannot encode an empty sequence");
  SegmentRun out;
  int current = frames[0];
  std::int64_t length = 1;
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i] == current) {
      ++length;
    } else {
      out.runs.emplace_back(current, length);
      current = frames[i];
      length = 1;
    }
  }
  out.runs.emplace_back(current, length);
  return out;
}

std::vector<int> run_length_decode(const SegmentRun& runs) {
  std::vector<int> frames;
  frames.reserve(static_cast<std::size_t>(runs.total_frames()));
  for (const auto& [id, length] : runs.runs)
    frames.insert(frames.end(), static_cast<std::size_t>(length), id);
  return frames;
}

std::map<int, RiskCategory> attach_risk(
    const LabelSet& labels, const std::map<std::string, RiskCategory>& risk) {
  std::map<int, RiskCategory> out;
  for (int id = 0; id < labels.size(); ++id) {
    const std::string canonical = labels.labels[static_cast<std::size_t>(id)].canonical();
    const auto it = risk.find(canonical);
    if (it == risk.end())
      fail(Errc::missing_risk, "no risk category for label '" + canonical + "'");
    out.emplace(id, it->second);
  }
  return out;
}

}  // namespace ergoseg
