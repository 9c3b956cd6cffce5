#include "ergoseg/kinematics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "ergoseg/error.hpp"

namespace ergoseg {

namespace {

constexpr double kDegenerateNorm = 1e-9;

Vec3 project_onto_plane(const Vec3& v, const Vec3& unit_normal) {
  return v - unit_normal * dot(v, unit_normal);
}

double clamped_acos_deg(double cosine) {
  return rad_to_deg(std::acos(std::clamp(cosine, -1.0, 1.0)));
}

// Unprojected angle between two segment vectors.
double segment_angle(const Vec3& u, const Vec3& v, const char* part) {
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu < kDegenerateNorm || nv < kDegenerateNorm)
    fail(Errc::degenerate_projection,
         std::string(part) + ": zero-length segment vector");
  return clamped_acos_deg(dot(u, v) / (nu * nv));
}

double projected_angle_named(const Vec3& u, const Vec3& v, const Vec3& n,
                             const char* part) {
  const Vec3 pu = project_onto_plane(u, n);
  const Vec3 pv = project_onto_plane(v, n);
  const double nu = norm(pu);
  const double nv = norm(pv);
  if (nu < kDegenerateNorm || nv < kDegenerateNorm)
    fail(Errc::degenerate_projection,
         std::string(part) + ": projection collapses to zero");
  return clamped_acos_deg(dot(pu, pv) / (nu * nv));
}

// In-plane angle from a reference direction to a body segment. A segment that
// lies along the plane normal has no component in this plane of motion; its
// in-plane angle is taken as 0, the continuous limit. A collapsed reference
// or a zero-length segment stays an error.
double plane_of_motion_angle(const Vec3& reference, const Vec3& segment,
                             const Vec3& plane_normal, bool is_signed,
                             const char* part) {
  if (norm(segment) < kDegenerateNorm)
    fail(Errc::degenerate_projection,
         std::string(part) + ": zero-length segment vector");
  const Vec3 pu = project_onto_plane(reference, plane_normal);
  const Vec3 pv = project_onto_plane(segment, plane_normal);
  const double nu = norm(pu);
  if (nu < kDegenerateNorm)
    fail(Errc::degenerate_projection,
         std::string(part) + ": reference projection collapses to zero");
  const double nv = norm(pv);
  if (nv < kDegenerateNorm) return 0.0;
  if (!is_signed) return clamped_acos_deg(dot(pu, pv) / (nu * nv));
  const double y = dot(plane_normal, cross(pu, pv));
  const double x = dot(pu, pv);
  return rad_to_deg(std::atan2(y, x));
}

}  // namespace

BodyFrame body_frame(const std::vector<Vec3>& frame,
                     const ResolvedLayout& layout) {
  const Vec3 left_hip = layout.joint(frame, JointRole::left_hip);
  const Vec3 right_hip = layout.joint(frame, JointRole::right_hip);
  const Vec3 hip_line = left_hip - right_hip;
  if (norm(hip_line) < kDegenerateNorm)
    fail(Errc::degenerate_frame, "hip joints coincide");

  BodyFrame bf;
  bf.sagittal_normal = normalized(hip_line);
  // Neutral spine direction is the world up axis, re-orthogonalized against
  // the hip line.
  const Vec3 up = normalized(layout.up);
  const Vec3 t = up - bf.sagittal_normal * dot(up, bf.sagittal_normal);
  if (norm(t) < kDegenerateNorm)
    fail(Errc::degenerate_frame, "hip line is parallel to the up axis");
  bf.transverse_normal = normalized(t);
  bf.coronal_normal = cross(bf.sagittal_normal, bf.transverse_normal);
  return bf;
}

double projected_angle(const Vec3& u, const Vec3& v, const Vec3& plane_normal) {
  return projected_angle_named(u, v, normalized(plane_normal), "projected_angle");
}

PostureAngles posture_angles(const std::vector<Vec3>& frame,
                             const ResolvedLayout& layout) {
  const BodyFrame bf = body_frame(frame, layout);
  const auto joint = [&](JointRole role) { return layout.joint(frame, role); };

  const Vec3 spine_base = joint(JointRole::spine_base);
  const Vec3 spine_mid = joint(JointRole::spine_mid);
  const Vec3 spine_top = joint(JointRole::spine_top);
  const Vec3 lower_spine = spine_mid - spine_base;
  const Vec3 trunk_up = spine_top - spine_base;
  const Vec3 trunk_down = Vec3{} - trunk_up;

  PostureAngles angles;

  // Trunk relative to the neutral upright direction. The sagittal-plane sign
  // is positive toward the coronal (facing) axis, i.e. forward lean.
  angles.trunk_flexion = plane_of_motion_angle(
      bf.transverse_normal, lower_spine, bf.sagittal_normal, true, "trunk");
  angles.trunk_side_flexion = plane_of_motion_angle(
      bf.transverse_normal, lower_spine, bf.coronal_normal, false, "trunk_side");

  const Vec3 shoulder_line =
      joint(JointRole::left_shoulder) - joint(JointRole::right_shoulder);
  const Vec3 hip_line = joint(JointRole::left_hip) - joint(JointRole::right_hip);
  angles.trunk_twist = plane_of_motion_angle(hip_line, shoulder_line,
                                             bf.transverse_normal, false,
                                             "trunk_twist");

  const Vec3 neck_vec = joint(JointRole::head) - joint(JointRole::neck);
  angles.neck_flexion = plane_of_motion_angle(trunk_up, neck_vec,
                                              bf.sagittal_normal, true, "neck");

  const auto knee_flexion = [&](JointRole hip, JointRole knee, JointRole ankle,
                                const char* part) {
    const Vec3 thigh = joint(knee) - joint(hip);
    const Vec3 shank = joint(ankle) - joint(knee);
    return segment_angle(thigh, shank, part);
  };
  angles.knee_flexion_left = knee_flexion(
      JointRole::left_hip, JointRole::left_knee, JointRole::left_ankle, "left_knee");
  angles.knee_flexion_right =
      knee_flexion(JointRole::right_hip, JointRole::right_knee,
                   JointRole::right_ankle, "right_knee");

  // Arm posture is measured against the trunk, in trunk-attached planes, so
  // that a bent-over subject's hanging arms still read as neutral.
  const Vec3 trunk_axis = normalized(trunk_up);
  Vec3 trunk_sagittal =
      bf.sagittal_normal - trunk_axis * dot(bf.sagittal_normal, trunk_axis);
  if (norm(trunk_sagittal) < 1e-9)
    fail(Errc::degenerate_frame, "trunk axis is parallel to the hip line");
  trunk_sagittal = normalized(trunk_sagittal);
  const Vec3 trunk_coronal = cross(trunk_sagittal, trunk_axis);

  const auto arm_angles = [&](JointRole shoulder, JointRole elbow,
                              JointRole wrist, JointRole hand, bool left) {
    const Vec3 upper_arm = joint(elbow) - joint(shoulder);
    const Vec3 forearm = joint(wrist) - joint(elbow);
    const Vec3 hand_vec = joint(hand) - joint(wrist);
    const char* side = left ? "left_arm" : "right_arm";
    // Flexion against the hanging-arm direction in the trunk sagittal plane;
    // abduction against the same reference in the trunk coronal plane.
    const double flexion = plane_of_motion_angle(
        trunk_down, upper_arm, Vec3{} - trunk_sagittal, true, side);
    const double abduction = plane_of_motion_angle(trunk_down, upper_arm,
                                                   trunk_coronal, false, side);
    const double lower = segment_angle(upper_arm, forearm, side);
    const double wrist_flex = segment_angle(forearm, hand_vec, side);
    return std::array<double, 4>{flexion, abduction, lower, wrist_flex};
  };
  const auto left = arm_angles(JointRole::left_shoulder, JointRole::left_elbow,
                               JointRole::left_wrist, JointRole::left_hand, true);
  const auto right =
      arm_angles(JointRole::right_shoulder, JointRole::right_elbow,
                 JointRole::right_wrist, JointRole::right_hand, false);
  angles.upper_arm_flexion_left = left[0];
  angles.shoulder_abduction_left = left[1];
  angles.lower_arm_flexion_left = left[2];
  angles.wrist_flexion_left = left[3];
  angles.upper_arm_flexion_right = right[0];
  angles.shoulder_abduction_right = right[1];
  angles.lower_arm_flexion_right = right[2];
  angles.wrist_flexion_right = right[3];
  return angles;
}

std::vector<PostureAngles> posture_angles_sequence(
    const SkeletonSequence& seq, const ResolvedLayout& layout) {
  std::vector<PostureAngles> out;
  out.reserve(seq.frame_count());
  for (const auto& frame : seq.positions)
    out.push_back(posture_angles(frame, layout));
  return out;
}

}  // namespace ergoseg
