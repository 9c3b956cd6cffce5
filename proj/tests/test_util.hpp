#pragma once

#include <map>
#include <string>
#include <vector>

#include "ergoseg/geometry.hpp"
#include "ergoseg/rng.hpp"
#include "ergoseg/skeleton.hpp"

namespace ergoseg::testing {

// A skeleton whose joint names are exactly the role names, for building
// poses directly.
struct TestPose {
  JointLayout layout;
  std::vector<Vec3> joints;

  Vec3& at(JointRole role) { return joints[static_cast<std::size_t>(role)]; }
  const Vec3& at(JointRole role) const {
    return joints[static_cast<std::size_t>(role)];
  }
  ResolvedLayout resolved() const {
    return resolve_layout(layout, layout.joint_names);
  }
};

inline TestPose neutral_pose() {
  TestPose pose;
  pose.layout.name = "roles";
  for (int i = 0; i < kNumJointRoles; ++i) {
    const char* name = joint_role_name(static_cast<JointRole>(i));
    pose.layout.joint_names.emplace_back(name);
    pose.layout.role_to_joint[static_cast<JointRole>(i)] = name;
  }
  pose.joints.resize(kNumJointRoles);
  pose.at(JointRole::spine_base) = {0.0, 1.0, 0.0};
  pose.at(JointRole::spine_mid) = {0.0, 1.25, 0.0};
  pose.at(JointRole::spine_top) = {0.0, 1.5, 0.0};
  pose.at(JointRole::neck) = {0.0, 1.55, 0.0};
  pose.at(JointRole::head) = {0.0, 1.7, 0.0};
  pose.at(JointRole::left_shoulder) = {0.2, 1.5, 0.0};
  pose.at(JointRole::right_shoulder) = {-0.2, 1.5, 0.0};
  pose.at(JointRole::left_elbow) = {0.2, 1.2, 0.0};
  pose.at(JointRole::right_elbow) = {-0.2, 1.2, 0.0};
  pose.at(JointRole::left_wrist) = {0.2, 0.95, 0.0};
  pose.at(JointRole::right_wrist) = {-0.2, 0.95, 0.0};
  pose.at(JointRole::left_hand) = {0.2, 0.85, 0.0};
  pose.at(JointRole::right_hand) = {-0.2, 0.85, 0.0};
  pose.at(JointRole::left_hip) = {0.1, 1.0, 0.0};
  pose.at(JointRole::right_hip) = {-0.1, 1.0, 0.0};
  pose.at(JointRole::left_knee) = {0.1, 0.5, 0.0};
  pose.at(JointRole::right_knee) = {-0.1, 0.5, 0.0};
  pose.at(JointRole::left_ankle) = {0.1, 0.05, 0.0};
  pose.at(JointRole::right_ankle) = {-0.1, 0.05, 0.0};
  return pose;
}

inline void transform_pose(TestPose& pose, const Mat3& rotation,
                           const Vec3& translation) {
  for (auto& joint : pose.joints) joint = rotation * joint + translation;
}

// 33-marker hierarchy (26 joints + 7 end sites) in the style of a kitchen
// motion-capture skeleton, with root position+rotation channels.
std::string tum33_bvh_text(int frames);

// Random label sequence over n_classes, geometric-ish segment lengths.
inline std::vector<int> random_label_sequence(Rng& rng, int frames,
                                              int n_classes) {
  std::vector<int> out;
  int current = rng.uniform_int(0, n_classes - 1);
  while (static_cast<int>(out.size()) < frames) {
    const int run = rng.uniform_int(1, 12);
    for (int i = 0; i < run && static_cast<int>(out.size()) < frames; ++i)
      out.push_back(current);
    int next = rng.uniform_int(0, n_classes - 1);
    if (n_classes > 1)
      while (next == current) next = rng.uniform_int(0, n_classes - 1);
    current = next;
  }
  return out;
}

}  // namespace ergoseg::testing
