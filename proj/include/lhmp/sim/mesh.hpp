#pragma once

#include <cstdint>
#include <vector>

#include "lhmp/sim/rig.hpp"

namespace lhmp::sim {

struct LabeledMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::uint8_t> tri_part;
  std::vector<Vec3> tri_normal;  // unit, outward
};

// Hemisphere rings per capsule cap; the segment count is the caller's knob.
inline constexpr int kCapsuleRings = 3;

// Triangles emitted per capsule: two caps of (s + 2s*(rings-1)) plus a 2s
// cylinder band = 4 * s * rings.
constexpr int capsule_triangle_count(int segments) {
  return 4 * segments * kCapsuleRings;
}

// Skins every bone as a capsule between its parent and child joints. Each
// triangle carries the bone's part label. Throws on degenerate bones
// (parent/child closer than 1e-6 m).
LabeledMesh skin_rig(const HumanoidRig& rig, const Pose& pose, int segments_per_capsule);

// Checks index ranges, unit normals and non-degenerate areas.
void validate_mesh(const LabeledMesh& mesh);

}  // namespace lhmp::sim
