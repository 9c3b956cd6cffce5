#pragma once

#include <string>
#include <vector>

#include "ergoseg/geometry.hpp"
#include "ergoseg/matrix.hpp"
#include "ergoseg/skeleton.hpp"

namespace ergoseg {

enum class BvhChannel {
  x_position,
  y_position,
  z_position,
  x_rotation,
  y_rotation,
  z_rotation,
};

const char* bvh_channel_name(BvhChannel channel);

struct JointNode {
  std::string name;
  Vec3 offset;
  std::vector<BvhChannel> channels;
  std::vector<JointNode> children;
  bool is_end_site = false;

  bool operator==(const JointNode& o) const = default;
};

struct BvhDocument {
  JointNode root;
  std::size_t frame_count = 0;
  double frame_time = 0.0;  // seconds
  // frame-major, one column per channel in hierarchy order
  Matrix motion;

  std::size_t channel_count() const;
  bool operator==(const BvhDocument& o) const = default;
};

BvhDocument parse_bvh(const std::string& text);
std::string serialize_bvh(const BvhDocument& doc);

// Composes parent transforms root-to-leaf; rotations applied in channel order
// as written in the file. End sites appear as "<parent>_end".
SkeletonSequence forward_kinematics(const BvhDocument& doc);

}  // namespace ergoseg
