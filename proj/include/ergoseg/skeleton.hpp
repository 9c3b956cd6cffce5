#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ergoseg/geometry.hpp"

namespace ergoseg {

enum class SkeletonSource { bvh_tum33, table_kinect25 };

// World-space joint positions per frame, the common currency both ingestion
// paths produce.
struct SkeletonSequence {
  std::vector<std::string> joint_names;
  double fps = 0.0;
  // positions[frame][joint]
  std::vector<std::vector<Vec3>> positions;
  SkeletonSource source = SkeletonSource::bvh_tum33;

  std::size_t frame_count() const { return positions.size(); }
  std::size_t joint_count() const { return joint_names.size(); }
};

enum class JointRole {
  spine_base,
  spine_mid,
  spine_top,
  neck,
  head,
  left_shoulder,
  right_shoulder,
  left_elbow,
  right_elbow,
  left_wrist,
  right_wrist,
  left_hand,
  right_hand,
  left_hip,
  right_hip,
  left_knee,
  right_knee,
  left_ankle,
  right_ankle,
};

inline constexpr int kNumJointRoles = 19;

const char* joint_role_name(JointRole role);
JointRole parse_joint_role(const std::string& name);

// Maps anatomical roles onto the joint names of a concrete skeleton.
struct JointLayout {
  std::string name;
  // Column order for joint tables (1 + 3*J columns).
  std::vector<std::string> joint_names;
  std::map<JointRole, std::string> role_to_joint;
  Vec3 up{0.0, 1.0, 0.0};

  static JointLayout kinect25();
  static JointLayout tum33();

  // Overrides entries from lines of "<role> = <joint_name>".
  void apply_role_map(std::istream& in);
};

// Role -> joint index against a specific sequence's joint order.
struct ResolvedLayout {
  std::array<int, kNumJointRoles> index;
  Vec3 up;

  const Vec3& joint(const std::vector<Vec3>& frame, JointRole role) const {
    return frame[static_cast<std::size_t>(index[static_cast<int>(role)])];
  }
};

ResolvedLayout resolve_layout(const JointLayout& layout,
                              const std::vector<std::string>& joint_names);

struct TableOptions {
  bool has_header = false;
  double fps = 12.0;
  // Fraction of rows that may need repair before the file is rejected.
  double max_invalid_fraction = 0.2;
};

// Reads a delimited joint-position table (frame index followed by x,y,z per
// joint in layout order). Unparseable or NaN cells are repaired by linear
// interpolation between the nearest valid frames of the same joint.
SkeletonSequence read_joint_table(std::istream& in, const JointLayout& layout,
                                  const TableOptions& options = {});

}  // namespace ergoseg
