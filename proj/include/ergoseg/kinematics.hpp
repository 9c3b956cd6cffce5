#pragma once

#include <vector>

#include "ergoseg/geometry.hpp"
#include "ergoseg/skeleton.hpp"

namespace ergoseg {

// Anatomical plane normals for one frame. sagittal points along the hip line
// (right to left), transverse along neutral-up, coronal along facing.
struct BodyFrame {
  Vec3 sagittal_normal;
  Vec3 transverse_normal;
  Vec3 coronal_normal;
};

// Extension/flexion/abduction angles in degrees. Signed fields are positive
// in flexion and negative in extension; unsigned fields are magnitudes.
struct PostureAngles {
  double trunk_flexion = 0.0;
  double trunk_side_flexion = 0.0;
  double trunk_twist = 0.0;
  double neck_flexion = 0.0;
  double knee_flexion_left = 0.0;
  double knee_flexion_right = 0.0;
  double upper_arm_flexion_left = 0.0;
  double upper_arm_flexion_right = 0.0;
  double shoulder_abduction_left = 0.0;
  double shoulder_abduction_right = 0.0;
  double lower_arm_flexion_left = 0.0;
  double lower_arm_flexion_right = 0.0;
  double wrist_flexion_left = 0.0;
  double wrist_flexion_right = 0.0;
};

BodyFrame body_frame(const std::vector<Vec3>& frame,
                     const ResolvedLayout& layout);

// Angle between u and v after removing their components along plane_normal,
// in [0, 180] degrees.
double projected_angle(const Vec3& u, const Vec3& v, const Vec3& plane_normal);

PostureAngles posture_angles(const std::vector<Vec3>& frame,
                             const ResolvedLayout& layout);

std::vector<PostureAngles> posture_angles_sequence(const SkeletonSequence& seq,
                                                   const ResolvedLayout& layout);

}  // namespace ergoseg
