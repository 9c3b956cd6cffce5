#include "ergoseg/skeleton.hpp"

#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <sstream>

#include "ergoseg/error.hpp"

namespace ergoseg {

namespace {

constexpr const char* kRoleNames[kNumJointRoles] = {
    "spine_base", "spine_mid",  "spine_top",     "neck",
    "head",       "left_shoulder", "right_shoulder", "left_elbow",
    "right_elbow", "left_wrist", "right_wrist",  "left_hand",
    "right_hand", "left_hip",   "right_hip",     "left_knee",
    "right_knee", "left_ankle", "right_ankle",
};

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

const char* joint_role_name(JointRole role) {
  return kRoleNames[static_cast<int>(role)];
}

JointRole parse_joint_role(const std::string& name) {
  for (int i = 0; i < kNumJointRoles; ++i)
    if (name == kRoleNames[i]) return static_cast<JointRole>(i);
  fail(Errc::config_error, "unknown joint role '" + name + "'");
}

JointLayout JointLayout::kinect25() {
  JointLayout layout;
  layout.name = "kinect25";
  layout.joint_names = {
      "SpineBase",  "SpineMid",   "Neck",       "Head",        "ShoulderLeft",
      "ElbowLeft",  "WristLeft",  "HandLeft",   "ShoulderRight", "ElbowRight",
      "WristRight", "HandRight",  "HipLeft",    "KneeLeft",    "AnkleLeft",
      "FootLeft",   "HipRight",   "KneeRight",  "AnkleRight",  "FootRight",
      "SpineShoulder", "HandTipLeft", "ThumbLeft", "HandTipRight", "ThumbRight"};
  layout.role_to_joint = {
      {JointRole::spine_base, "SpineBase"},
      {JointRole::spine_mid, "SpineMid"},
      {JointRole::spine_top, "SpineShoulder"},
      {JointRole::neck, "Neck"},
      {JointRole::head, "Head"},
      {JointRole::left_shoulder, "ShoulderLeft"},
      {JointRole::right_shoulder, "ShoulderRight"},
      {JointRole::left_elbow, "ElbowLeft"},
      {JointRole::right_elbow, "ElbowRight"},
      {JointRole::left_wrist, "WristLeft"},
      {JointRole::right_wrist, "WristRight"},
      {JointRole::left_hand, "HandLeft"},
      {JointRole::right_hand, "HandRight"},
      {JointRole::left_hip, "HipLeft"},
      {JointRole::right_hip, "HipRight"},
      {JointRole::left_knee, "KneeLeft"},
      {JointRole::right_knee, "KneeRight"},
      {JointRole::left_ankle, "AnkleLeft"},
      {JointRole::right_ankle, "AnkleRight"},
  };
  return layout;
}

JointLayout JointLayout::tum33() {
  JointLayout layout;
  layout.name = "tum33";
  // Joint names of the marker hierarchy; end sites resolve as "<parent>_end".
  layout.joint_names = {
      "Hips",          "LowerBack",     "Spine",        "Spine1",
      "Neck",          "Head",          "LeftShoulder", "LeftArm",
      "LeftForeArm",   "LeftHand",      "LeftFingerBase", "LeftThumb",
      "RightShoulder", "RightArm",      "RightForeArm", "RightHand",
      "RightFingerBase", "RightThumb",  "LeftUpLeg",    "LeftLeg",
      "LeftFoot",      "LeftToeBase",   "RightUpLeg",   "RightLeg",
      "RightFoot",     "RightToeBase"};
  layout.role_to_joint = {
      {JointRole::spine_base, "Hips"},
      {JointRole::spine_mid, "Spine"},
      {JointRole::spine_top, "Spine1"},
      {JointRole::neck, "Neck"},
      {JointRole::head, "Head"},
      {JointRole::left_shoulder, "LeftArm"},
      {JointRole::right_shoulder, "RightArm"},
      {JointRole::left_elbow, "LeftForeArm"},
      {JointRole::right_elbow, "RightForeArm"},
      {JointRole::left_wrist, "LeftHand"},
      {JointRole::right_wrist, "RightHand"},
      {JointRole::left_hand, "LeftFingerBase"},
      {JointRole::right_hand, "RightFingerBase"},
      {JointRole::left_hip, "LeftUpLeg"},
      {JointRole::right_hip, "RightUpLeg"},
      {JointRole::left_knee, "LeftLeg"},
      {JointRole::right_knee, "RightLeg"},
      {JointRole::left_ankle, "LeftFoot"},
      {JointRole::right_ankle, "RightFoot"},
  };
  return layout;
}

void JointLayout::apply_role_map(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      fail(Errc::config_error, "role map line missing '=': " + stripped);
    const JointRole role = parse_joint_role(trim(stripped.substr(0, eq)));
    role_to_joint[role] = trim(stripped.substr(eq + 1));
  }
}

ResolvedLayout resolve_layout(const JointLayout& layout,
                              const std::vector<std::string>& joint_names) {
  ResolvedLayout resolved;
  resolved.up = layout.up;
  resolved.index.fill(-1);
  for (const auto& [role, joint] : layout.role_to_joint) {
    for (std::size_t i = 0; i < joint_names.size(); ++i)
      if (joint_names[i] == joint) {
        resolved.index[static_cast<int>(role)] = static_cast<int>(i);
        break;
      }
  }
  for (int i = 0; i < kNumJointRoles; ++i)
    if (resolved.index[i] < 0)
      fail(Errc::config_error,
           std::string("joint role '") + kRoleNames[i] +
               "' is not mapped to any joint of this skeleton");
  return resolved;
}

namespace {

struct RawCell {
  double value = 0.0;
  bool valid = false;
};

// Splits on the detected delimiter and parses each cell; unparseable or
// non-finite cells stay invalid.
std::vector<RawCell> parse_row(const std::string& line, char delim) {
  std::vector<RawCell> cells;
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t end = line.find(delim, start);
    if (end == std::string::npos) end = line.size();
    const std::string cell = trim(line.substr(start, end - start));
    RawCell raw;
    if (!cell.empty()) {
      char* stop = nullptr;
      raw.value = std::strtod(cell.c_str(), &stop);
      raw.valid = stop == cell.c_str() + cell.size() && std::isfinite(raw.value);
    }
    cells.push_back(raw);
    if (end == line.size()) break;
    start = end + 1;
  }
  return cells;
}

}  // namespace

SkeletonSequence read_joint_table(std::istream& in, const JointLayout& layout,
                                  const TableOptions& options) {
  const std::size_t joints = layout.joint_names.size();
  const std::size_t expected_cols = 1 + 3 * joints;

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    const std::string stripped = trim(line);
    if (!stripped.empty()) lines.push_back(stripped);
  }
  if (options.has_header && !lines.empty()) lines.erase(lines.begin());
  if (lines.empty()) fail(Errc::empty_sequence, "joint table has no data rows");

  const char delim = lines[0].find(',') != std::string::npos ? ',' : '\t';

  const std::size_t frames = lines.size();
  // valid[f][j] marks joints usable as interpolation anchors.
  std::vector<std::vector<bool>> valid(frames, std::vector<bool>(joints, true));
  std::vector<std::vector<Vec3>> positions(frames, std::vector<Vec3>(joints));
  std::size_t invalid_rows = 0;
  double previous_index = -std::numeric_limits<double>::infinity();

  for (std::size_t f = 0; f < frames; ++f) {
    const auto cells = parse_row(lines[f], delim);
    if (cells.size() != expected_cols)
      fail(Errc::row_width_mismatch,
           "row " + std::to_string(f) + " has " + std::to_string(cells.size()) +
               " columns, expected " + std::to_string(expected_cols));
    if (!cells[0].valid)
      fail(Errc::row_width_mismatch,
           "row " + std::to_string(f) + " has a bad frame index");
    if (cells[0].value <= previous_index)
      fail(Errc::non_monotone_frame_index,
           "frame index does not increase at row " + std::to_string(f));
    previous_index = cells[0].value;

    bool row_ok = true;
    for (std::size_t j = 0; j < joints; ++j) {
      const RawCell& cx = cells[1 + 3 * j];
      const RawCell& cy = cells[2 + 3 * j];
      const RawCell& cz = cells[3 + 3 * j];
      if (cx.valid && cy.valid && cz.valid) {
        positions[f][j] = {cx.value, cy.value, cz.value};
      } else {
        valid[f][j] = false;
        row_ok = false;
      }
    }
    if (!row_ok) ++invalid_rows;
  }

  if (static_cast<double>(invalid_rows) >
      options.max_invalid_fraction * static_cast<double>(frames))
    fail(Errc::too_many_invalid_rows,
         std::to_string(invalid_rows) + " of " + std::to_string(frames) +
             " rows need repair, above the rejection threshold");

  // Repair: linear interpolation between nearest valid frames per joint;
  // leading/trailing gaps copy the nearest valid frame.
  for (std::size_t j = 0; j < joints; ++j) {
    std::size_t f = 0;
    while (f < frames) {
      if (valid[f][j]) {
        ++f;
        continue;
      }
      std::size_t gap_end = f;
      while (gap_end < frames && !valid[gap_end][j]) ++gap_end;
      const bool has_before = f > 0;
      const bool has_after = gap_end < frames;
      if (!has_before && !has_after)
        fail(Errc::too_many_invalid_rows,
             "joint '" + layout.joint_names[j] + "' has no valid sample");
      for (std::size_t g = f; g < gap_end; ++g) {
        if (has_before && has_after) {
          const std::size_t f0 = f - 1;
          const double t = static_cast<double>(g - f0) /
                           static_cast<double>(gap_end - f0);
          positions[g][j] =
              positions[f0][j] + (positions[gap_end][j] - positions[f0][j]) * t;
        } else if (has_before) {
          positions[g][j] = positions[f - 1][j];
        } else {
          positions[g][j] = positions[gap_end][j];
        }
      }
      f = gap_end;
    }
  }

  SkeletonSequence seq;
  seq.joint_names = layout.joint_names;
  seq.fps = options.fps;
  seq.positions = std::move(positions);
  seq.source = SkeletonSource::table_kinect25;
  return seq;
}

}  // namespace ergoseg
