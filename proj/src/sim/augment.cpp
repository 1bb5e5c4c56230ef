#include "lhmp/sim/augment.hpp"

#include <algorithm>
#include <cmath>

#include "lhmp/rng.hpp"

namespace lhmp::sim {

ScanFrame inject_noise(const ScanFrame& frame, int n_noise, double radius,
                       std::uint64_t seed, bool* warned_empty) {
  LHMP_CHECK(radius > 0.0, "inject_noise: radius must be positive");
  LHMP_CHECK(n_noise >= 0, "inject_noise: negative noise count");
  if (warned_empty) *warned_empty = false;
  if (frame.points.empty()) {
    if (warned_empty) *warned_empty = true;
    return frame;
  }
  if (n_noise == 0) return frame;

  // Bounding box of the body points (noise-labeled points are ignored when
  // any body point exists).
  Vec3 lo, hi;
  bool first = true;
  for (size_t i = 0; i < frame.points.size(); ++i) {
    if (frame.labels[i] == kNoiseLabel) continue;
    const Vec3& p = frame.points[i];
    if (first) {
      lo = hi = p;
      first = false;
    } else {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
  }
  if (first) {  // only noise points present
    lo = hi = frame.points[0];
    for (const Vec3& p : frame.points) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
  }

  ScanFrame out = frame;
  Rng rng(derive_seed(seed, hash_str("inject-noise")));
  Vec3 elo = lo - Vec3{radius, radius, radius};
  Vec3 ehi = hi + Vec3{radius, radius, radius};
  auto inside_bbox = [&](const Vec3& p) {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y &&
           p.z >= lo.z && p.z <= hi.z;
  };
  for (int k = 0; k < n_noise; ++k) {
    Vec3 p;
    do {
      p = {rng.uniform(elo.x, ehi.x), rng.uniform(elo.y, ehi.y),
           rng.uniform(elo.z, ehi.z)};
    } while (inside_bbox(p));
    out.points.push_back(p);
    out.labels.push_back(kNoiseLabel);
  }
  return out;
}

ScanFrame inject_occlusion(const ScanFrame& frame, double cube_side,
                           std::uint64_t seed) {
  LHMP_CHECK(cube_side > 0.0, "inject_occlusion: cube_side must be positive");
  if (frame.points.empty()) return frame;

  std::vector<int> body;
  for (size_t i = 0; i < frame.points.size(); ++i)
    if (frame.labels[i] != kNoiseLabel) body.push_back(static_cast<int>(i));
  if (body.empty()) return frame;

  Rng rng(derive_seed(seed, hash_str("inject-occlusion")));
  Vec3 center = frame.points[body[rng.uniform_index(body.size())]];

  const double half = 0.5 * cube_side;
  ScanFrame out;
  out.gt_joints = frame.gt_joints;
  out.timestamp = frame.timestamp;
  for (size_t i = 0; i < frame.points.size(); ++i) {
    const Vec3& p = frame.points[i];
    bool inside = std::abs(p.x - center.x) < half &&
                  std::abs(p.y - center.y) < half &&
                  std::abs(p.z - center.z) < half;
    if (!inside) {
      out.points.push_back(p);
      out.labels.push_back(frame.labels[i]);
    }
  }
  return out;
}

}  // namespace lhmp::sim
