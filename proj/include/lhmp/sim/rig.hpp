#pragma once

#include <array>
#include <cstdint>

#include "lhmp/common.hpp"

namespace lhmp::sim {

// Row-major 3x3 rotation matrix, enough linear algebra for forward kinematics.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return {}; }
  static Mat3 rot_x(double a);
  static Mat3 rot_y(double a);
  static Mat3 rot_z(double a);

  Vec3 operator*(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
  Mat3 operator*(const Mat3& o) const;
};

inline constexpr int kNumBones = kNumJoints - 1;  // one bone per non-root joint

// 24-joint humanoid with SMPL-style joint ordering and a 9-part body labeling.
// Bone b connects parent(b+1) -> joint b+1 and is skinned as a capsule.
struct HumanoidRig {
  Pose rest_joints;
  std::array<int, kNumJoints> parent;           // root has parent -1
  std::array<double, kNumBones> bone_radius;    // meters
  std::array<std::uint8_t, kNumBones> bone_part;  // 0..8

  int bone_child(int bone) const { return bone + 1; }
  int bone_parent(int bone) const { return parent[bone + 1]; }
};

// The standing rig: z-up, pelvis above the origin, facing -y, ~1.8 m tall
// including the head capsule. T-pose (arms along +-x).
const HumanoidRig& default_rig();

// Per-joint local rotations applied down the kinematic tree, plus a root
// offset. Joint ordering guarantees parents precede children.
struct PoseAngles {
  std::array<Mat3, kNumJoints> local;
  Vec3 root_offset;
};

Pose pose_from_angles(const HumanoidRig& rig, const PoseAngles& angles);

}  // namespace lhmp::sim
