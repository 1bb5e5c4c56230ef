// Independent brute-force reference implementations used to cross-check the
// library. These deliberately avoid calling into the code under test.
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "lhmp/common.hpp"
#include "lhmp/sim/scan.hpp"

namespace oracle {

using lhmp::Vec3;

inline double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double sum_ab = 0.0;
  for (const Vec3& p : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& q : b) {
      double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
      best = std::min(best, dx * dx + dy * dy + dz * dz);
    }
    sum_ab += best;
  }
  double sum_ba = 0.0;
  for (const Vec3& q : b) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& p : a) {
      double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
      best = std::min(best, dx * dx + dy * dy + dz * dz);
    }
    sum_ba += best;
  }
  return sum_ab / a.size() + sum_ba / b.size();
}

inline std::vector<double> mpjpe(const std::vector<lhmp::Pose>& pred,
                                 const std::vector<lhmp::Pose>& gt) {
  std::vector<double> out;
  for (size_t t = 0; t < pred.size(); ++t) {
    double acc = 0.0;
    for (int j = 0; j < lhmp::kNumJoints; ++j) {
      double dx = pred[t][j].x - gt[t][j].x;
      double dy = pred[t][j].y - gt[t][j].y;
      double dz = pred[t][j].z - gt[t][j].z;
      acc += std::sqrt(dx * dx + dy * dy + dz * dz);
    }
    out.push_back(acc / lhmp::kNumJoints * 1000.0);
  }
  return out;
}

// Greedy farthest point sampling, written independently: start at the point
// farthest from the mean, then repeatedly take the point with the largest
// distance to the chosen set (ties at the lowest index).
inline std::vector<int> fps(const std::vector<Vec3>& pts, int n_target) {
  const int m = static_cast<int>(pts.size());
  Vec3 mean;
  for (const Vec3& p : pts) mean += p;
  mean = mean / static_cast<double>(m);

  std::vector<int> chosen;
  int first = 0;
  double fbest = -1.0;
  for (int i = 0; i < m; ++i) {
    double d = (pts[i] - mean).norm2();
    if (d > fbest) {
      fbest = d;
      first = i;
    }
  }
  chosen.push_back(first);
  while (static_cast<int>(chosen.size()) < std::min(n_target, m)) {
    int best_i = -1;
    double best_d = -1.0;
    for (int i = 0; i < m; ++i) {
      double dmin = std::numeric_limits<double>::infinity();
      for (int c : chosen) dmin = std::min(dmin, (pts[i] - pts[c]).norm2());
      if (dmin > best_d) {
        best_d = dmin;
        best_i = i;
      }
    }
    chosen.push_back(best_i);
  }
  while (static_cast<int>(chosen.size()) < n_target) chosen.push_back(0);
  return chosen;
}

struct Hit {
  Vec3 point;
  double range;
  int triangle;
};

// Plane intersection p = c + d * (n.(q-c))/(n.d) followed by a barycentric
// containment test, over every triangle.
inline std::optional<Hit> cast_all_triangles(const lhmp::sim::LabeledMesh& mesh,
                                             const Vec3& c, const Vec3& d,
                                             double max_range) {
  std::optional<Hit> best;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const Vec3& a = mesh.vertices[mesh.triangles[t][0]];
    const Vec3& b = mesh.vertices[mesh.triangles[t][1]];
    const Vec3& e = mesh.vertices[mesh.triangles[t][2]];
    const Vec3& n = mesh.tri_normal[t];
    double denom = n.dot(d);
    if (std::abs(denom) < 1e-12) continue;
    double s = n.dot(a - c) / denom;
    if (s <= 1e-9 || s > max_range) continue;
    Vec3 p = c + d * s;
    Vec3 v0 = b - a, v1 = e - a, v2 = p - a;
    double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
    double d20 = v2.dot(v0), d21 = v2.dot(v1);
    double det = d00 * d11 - d01 * d01;
    if (det <= 0.0) continue;
    double u = (d11 * d20 - d01 * d21) / det;
    double v = (d00 * d21 - d01 * d20) / det;
    if (u < -1e-12 || v < -1e-12 || u + v > 1.0 + 1e-12) continue;
    if (!best || s < best->range) best = Hit{p, s, t};
  }
  return best;
}

}  // namespace oracle
