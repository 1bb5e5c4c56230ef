#include "lhmp/sim/mesh.hpp"

#include <cmath>

namespace lhmp::sim {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kHalfPi = 1.5707963267948966192313216916398;

Vec3 closest_on_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  Vec3 ab = b - a;
  double len2 = ab.norm2();
  if (len2 <= 0.0) return a;
  double t = (p - a).dot(ab) / len2;
  t = std::min(1.0, std::max(0.0, t));
  return a + ab * t;
}

// Appends one capsule (axis a->b, radius r) to the mesh. Ring layout:
// bottom pole, kCapsuleRings rings per hemisphere (the last ring of each
// hemisphere is the cylinder rim), top pole.
void append_capsule(LabeledMesh& mesh, const Vec3& a, const Vec3& b, double r,
                    std::uint8_t part, int segments) {
  const int s = segments;
  const int base = static_cast<int>(mesh.vertices.size());

  Vec3 axis = b - a;
  double len = axis.norm();
  LHMP_CHECK(len >= 1e-6, "skin_rig: degenerate bone (length ", len, " m)");
  Vec3 u = axis / len;
  Vec3 h = std::abs(u.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  Vec3 v = u.cross(h).normalized();
  Vec3 w = u.cross(v);

  auto ring_point = [&](const Vec3& center, double ring_r, double axial, int j) {
    double phi = kTwoPi * j / s;
    return center + u * axial + (v * std::cos(phi) + w * std::sin(phi)) * ring_r;
  };

  // Vertices: pole_a, hemisphere rings at a (pole outward), cylinder rim at a
  // is the last of those; mirrored stack at b; pole_b.
  mesh.vertices.push_back(a - u * r);  // base + 0
  for (int i = 1; i <= kCapsuleRings; ++i) {
    double psi = kHalfPi * i / kCapsuleRings;
    for (int j = 0; j < s; ++j)
      mesh.vertices.push_back(ring_point(a, r * std::sin(psi), -r * std::cos(psi), j));
  }
  for (int i = kCapsuleRings; i >= 1; --i) {
    double psi = kHalfPi * i / kCapsuleRings;
    for (int j = 0; j < s; ++j)
      mesh.vertices.push_back(ring_point(b, r * std::sin(psi), r * std::cos(psi), j));
  }
  mesh.vertices.push_back(b + u * r);  // last

  const int n_rings = 2 * kCapsuleRings;
  const int top_pole = base + 1 + n_rings * s;
  auto rv = [&](int ring, int j) { return base + 1 + ring * s + (j % s); };

  auto emit = [&](int i0, int i1, int i2) {
    mesh.triangles.push_back({i0, i1, i2});
    mesh.tri_part.push_back(part);
  };

  for (int j = 0; j < s; ++j) emit(base, rv(0, j), rv(0, j + 1));
  for (int ring = 0; ring + 1 < n_rings; ++ring) {
    for (int j = 0; j < s; ++j) {
      emit(rv(ring, j), rv(ring + 1, j), rv(ring + 1, j + 1));
      emit(rv(ring, j), rv(ring + 1, j + 1), rv(ring, j + 1));
    }
  }
  for (int j = 0; j < s; ++j) emit(top_pole, rv(n_rings - 1, j + 1), rv(n_rings - 1, j));

  // Unit normals, forced outward from the capsule axis.
  for (size_t t = mesh.tri_normal.size(); t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec3& p0 = mesh.vertices[tri[0]];
    const Vec3& p1 = mesh.vertices[tri[1]];
    const Vec3& p2 = mesh.vertices[tri[2]];
    Vec3 n = (p1 - p0).cross(p2 - p0);
    double nn = n.norm();
    LHMP_CHECK(nn > 2e-12, "skin_rig: degenerate triangle");
    n = n / nn;
    Vec3 centroid = (p0 + p1 + p2) / 3.0;
    Vec3 outward = centroid - closest_on_segment(centroid, a, b);
    if (n.dot(outward) < 0.0) {
      n = n * -1.0;
      std::swap(mesh.triangles[t][1], mesh.triangles[t][2]);
    }
    mesh.tri_normal.push_back(n);
  }
}

}  // namespace

LabeledMesh skin_rig(const HumanoidRig& rig, const Pose& pose, int segments_per_capsule) {
  LHMP_CHECK(segments_per_capsule >= 3, "skin_rig: need at least 3 segments");
  LabeledMesh mesh;
  const int per_capsule = capsule_triangle_count(segments_per_capsule);
  mesh.vertices.reserve(kNumBones * (2 + 2 * kCapsuleRings * segments_per_capsule));
  mesh.triangles.reserve(kNumBones * per_capsule);
  for (int bone = 0; bone < kNumBones; ++bone) {
    const Vec3& a = pose[rig.bone_parent(bone)];
    const Vec3& b = pose[rig.bone_child(bone)];
    append_capsule(mesh, a, b, rig.bone_radius[bone], rig.bone_part[bone],
                   segments_per_capsule);
  }
  return mesh;
}

void validate_mesh(const LabeledMesh& mesh) {
  const int nv = static_cast<int>(mesh.vertices.size());
  LHMP_CHECK(mesh.triangles.size() == mesh.tri_part.size() &&
                 mesh.triangles.size() == mesh.tri_normal.size(),
             "mesh: per-triangle array size mismatch");
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    for (int k = 0; k < 3; ++k)
      LHMP_CHECK(mesh.triangles[t][k] >= 0 && mesh.triangles[t][k] < nv,
                 "mesh: vertex index out of range in triangle ", t);
    double n = mesh.tri_normal[t].norm();
    LHMP_CHECK(std::abs(n - 1.0) <= 1e-6, "mesh: non-unit normal in triangle ", t);
    const Vec3& p0 = mesh.vertices[mesh.triangles[t][0]];
    const Vec3& p1 = mesh.vertices[mesh.triangles[t][1]];
    const Vec3& p2 = mesh.vertices[mesh.triangles[t][2]];
    double area = 0.5 * (p1 - p0).cross(p2 - p0).norm();
    LHMP_CHECK(area > 1e-12, "mesh: degenerate triangle ", t, " (area ", area, ")");
  }
}

}  // namespace lhmp::sim
