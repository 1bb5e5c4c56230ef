#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lhmp/sim/mesh.hpp"

namespace lhmp::sim {

// Spinning-LiDAR beam grid: n_azimuth columns over 360 degrees, n_elevation
// rows over [elevation_min, elevation_max].
struct ScanConfig {
  Vec3 center{0.0, 0.0, 2.0};
  int n_azimuth = 512;
  int n_elevation = 64;
  double elevation_min = -0.30;  // radians
  double elevation_max = 0.12;
  double max_range = 120.0;      // meters
  double distance = 8.0;         // humanoid placement distance from scanner

  void validate() const;

  double azimuth(int i) const;
  double elevation(int j) const;
  // Beam direction for (azimuth, elevation): the unit vector
  // [cos(el)sin(az), cos(el)cos(az), sin(el)].
  Vec3 beam_dir(int i, int j) const;
};

struct ScanFrame {
  std::vector<Vec3> points;
  std::vector<std::uint8_t> labels;
  Pose gt_joints{};
  double timestamp = 0.0;
};

struct RayHit {
  Vec3 point;
  double range = 0.0;
  int triangle = -1;
};

// One ray against one triangle. The hit point is the plane intersection
// p = c + d * (n.(q - c)) / (n.d), accepted when the denominator is
// non-singular, the hit is in front of the sensor within max_range, and the
// barycentric point-in-triangle test passes with 1e-12 slack on the edges.
std::optional<RayHit> ray_triangle(const Vec3& origin, const Vec3& dir,
                                   const LabeledMesh& mesh, int tri,
                                   double max_range);

// Scans the whole beam grid. For each beam the nearest triangle hit is
// emitted with that triangle's part label; equal ranges resolve to the lowest
// triangle index. Beams with no hit emit nothing. Candidate triangles come
// from a conservative azimuth/elevation binning, so results are identical to
// testing every triangle.
ScanFrame ray_cast(const LabeledMesh& mesh, const ScanConfig& cfg);

}  // namespace lhmp::sim
