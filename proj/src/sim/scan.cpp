#include "lhmp/sim/scan.hpp"

#include <algorithm>
#include <cmath>

namespace lhmp::sim {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kPi = 3.1415926535897932384626433832795;
// Extra slack (radians) when mapping triangle extents to beam cells; only
// widens the candidate set.
constexpr double kBinSlack = 1e-7;
}  // namespace

void ScanConfig::validate() const {
  LHMP_CONFIG_CHECK(n_azimuth >= 1, "scan: n_azimuth must be >= 1");
  LHMP_CONFIG_CHECK(n_elevation >= 1, "scan: n_elevation must be >= 1");
  LHMP_CONFIG_CHECK(elevation_min < elevation_max,
                    "scan: elevation range must be strictly increasing");
  LHMP_CONFIG_CHECK(max_range > 0.0, "scan: max_range must be positive");
  LHMP_CONFIG_CHECK(distance > 0.0, "scan: distance must be positive");
}

double ScanConfig::azimuth(int i) const { return kTwoPi * i / n_azimuth; }

double ScanConfig::elevation(int j) const {
  if (n_elevation == 1) return 0.5 * (elevation_min + elevation_max);
  return elevation_min + (elevation_max - elevation_min) * j / (n_elevation - 1);
}

Vec3 ScanConfig::beam_dir(int i, int j) const {
  double az = azimuth(i);
  double el = elevation(j);
  double ce = std::cos(el);
  return {ce * std::sin(az), ce * std::cos(az), std::sin(el)};
}

std::optional<RayHit> ray_triangle(const Vec3& origin, const Vec3& dir,
                                   const LabeledMesh& mesh, int tri,
                                   double max_range) {
  const auto& idx = mesh.triangles[tri];
  const Vec3& a = mesh.vertices[idx[0]];
  const Vec3& b = mesh.vertices[idx[1]];
  const Vec3& c = mesh.vertices[idx[2]];
  const Vec3& n = mesh.tri_normal[tri];

  double denom = n.dot(dir);
  if (std::abs(denom) < 1e-12) return std::nullopt;  // beam parallel to plane
  double s = n.dot(a - origin) / denom;
  if (s <= 1e-9 || s > max_range) return std::nullopt;
  Vec3 p = origin + dir * s;

  // Barycentric containment with 1e-12 slack on edge cases.
  Vec3 v0 = b - a, v1 = c - a, v2 = p - a;
  double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
  double d20 = v2.dot(v0), d21 = v2.dot(v1);
  double det = d00 * d11 - d01 * d01;
  if (det <= 0.0) return std::nullopt;
  double u = (d11 * d20 - d01 * d21) / det;
  double v = (d00 * d21 - d01 * d20) / det;
  if (u < -1e-12 || v < -1e-12 || u + v > 1.0 + 1e-12) return std::nullopt;
  return RayHit{p, s, tri};
}

namespace {

// Conservative (azimuth, elevation) extent of one triangle as seen from the
// scan center. Falls back to the full grid when the triangle's horizontal
// projection reaches the sensor axis, where angular bounds degenerate.
struct AngExtent {
  bool full_azimuth = false;
  double az_lo = 0.0, az_hi = 0.0;
  double el_lo = 0.0, el_hi = 0.0;
};

double point_segment_dist2_2d(double px, double py, double ax, double ay,
                              double bx, double by) {
  double abx = bx - ax, aby = by - ay;
  double len2 = abx * abx + aby * aby;
  double t = len2 > 0.0 ? ((px - ax) * abx + (py - ay) * aby) / len2 : 0.0;
  t = std::min(1.0, std::max(0.0, t));
  double dx = px - (ax + t * abx), dy = py - (ay + t * aby);
  return dx * dx + dy * dy;
}

AngExtent triangle_extent(const LabeledMesh& mesh, int tri, const Vec3& c) {
  AngExtent e;
  double vx[3], vy[3], vz[3];
  for (int k = 0; k < 3; ++k) {
    Vec3 d = mesh.vertices[mesh.triangles[tri][k]] - c;
    vx[k] = d.x;
    vy[k] = d.y;
    vz[k] = d.z;
  }

  // Horizontal distance range over the projected triangle.
  double rho_min2 = std::min({point_segment_dist2_2d(0, 0, vx[0], vy[0], vx[1], vy[1]),
                              point_segment_dist2_2d(0, 0, vx[1], vy[1], vx[2], vy[2]),
                              point_segment_dist2_2d(0, 0, vx[2], vy[2], vx[0], vy[0])});
  // Inside test: same-side sign of cross products.
  double c0 = vx[0] * (vy[1] - vy[0]) - vy[0] * (vx[1] - vx[0]);
  double c1 = vx[1] * (vy[2] - vy[1]) - vy[1] * (vx[2] - vx[1]);
  double c2 = vx[2] * (vy[0] - vy[2]) - vy[2] * (vx[0] - vx[2]);
  bool inside = (c0 >= 0 && c1 >= 0 && c2 >= 0) || (c0 <= 0 && c1 <= 0 && c2 <= 0);
  if (inside) rho_min2 = 0.0;

  double rho_min = std::sqrt(rho_min2);
  double rho_max = 0.0;
  double dz_min = vz[0], dz_max = vz[0];
  for (int k = 0; k < 3; ++k) {
    rho_max = std::max(rho_max, std::hypot(vx[k], vy[k]));
    dz_min = std::min(dz_min, vz[k]);
    dz_max = std::max(dz_max, vz[k]);
  }

  // Elevation bounds: atan2(dz, rho) increases with dz, decreases with rho
  // for positive dz (and the reverse below the horizon).
  e.el_lo = std::atan2(dz_min, dz_min >= 0.0 ? rho_max : rho_min);
  e.el_hi = std::atan2(dz_max, dz_max >= 0.0 ? rho_min : rho_max);

  if (rho_min <= 1e-9) {
    e.full_azimuth = true;
    return e;
  }

  // Azimuth: extremes of a convex projection not containing the origin lie
  // at vertices. Work relative to vertex 0 to dodge the wrap seam.
  double az0 = std::atan2(vx[0], vy[0]);
  double lo = 0.0, hi = 0.0;
  for (int k = 1; k < 3; ++k) {
    double az = std::atan2(vx[k], vy[k]);
    double delta = az - az0;
    while (delta > kPi) delta -= kTwoPi;
    while (delta < -kPi) delta += kTwoPi;
    lo = std::min(lo, delta);
    hi = std::max(hi, delta);
  }
  if (hi - lo >= kPi) {  // ambiguous spread, give up on narrowing
    e.full_azimuth = true;
    return e;
  }
  e.az_lo = az0 + lo;
  e.az_hi = az0 + hi;
  return e;
}

}  // namespace

ScanFrame ray_cast(const LabeledMesh& mesh, const ScanConfig& cfg) {
  cfg.validate();
  LHMP_CHECK(!mesh.triangles.empty(), "ray_cast: empty mesh");

  const int n_az = cfg.n_azimuth;
  const int n_el = cfg.n_elevation;
  const int n_tri = static_cast<int>(mesh.triangles.size());

  // Bin triangle indices into beam cells; bins stay sorted because the
  // triangle loop is outermost, which preserves the lowest-index tie-break.
  std::vector<std::vector<int>> cells(static_cast<size_t>(n_az) * n_el);
  const double az_step = kTwoPi / n_az;
  const double el_span = (n_el > 1) ? (cfg.elevation_max - cfg.elevation_min) : 1.0;
  const double el_step = (n_el > 1) ? el_span / (n_el - 1) : 1.0;

  for (int t = 0; t < n_tri; ++t) {
    AngExtent e = triangle_extent(mesh, t, cfg.center);

    int j_lo = 0, j_hi = n_el - 1;
    if (n_el > 1) {
      j_lo = static_cast<int>(std::ceil((e.el_lo - kBinSlack - cfg.elevation_min) / el_step));
      j_hi = static_cast<int>(std::floor((e.el_hi + kBinSlack - cfg.elevation_min) / el_step));
      j_lo = std::max(j_lo, 0);
      j_hi = std::min(j_hi, n_el - 1);
    } else {
      double el = cfg.elevation(0);
      if (el < e.el_lo - kBinSlack || el > e.el_hi + kBinSlack) continue;
    }
    if (j_lo > j_hi) continue;

    if (e.full_azimuth) {
      for (int i = 0; i < n_az; ++i)
        for (int j = j_lo; j <= j_hi; ++j)
          cells[static_cast<size_t>(i) * n_el + j].push_back(t);
      continue;
    }
    int i_lo = static_cast<int>(std::ceil((e.az_lo - kBinSlack) / az_step));
    int i_hi = static_cast<int>(std::floor((e.az_hi + kBinSlack) / az_step));
    if (i_lo > i_hi) continue;
    for (int i = i_lo; i <= i_hi; ++i) {
      int iw = ((i % n_az) + n_az) % n_az;
      for (int j = j_lo; j <= j_hi; ++j)
        cells[static_cast<size_t>(iw) * n_el + j].push_back(t);
    }
  }

  ScanFrame frame;
  for (int i = 0; i < n_az; ++i) {
    for (int j = 0; j < n_el; ++j) {
      const auto& cand = cells[static_cast<size_t>(i) * n_el + j];
      if (cand.empty()) continue;
      Vec3 dir = cfg.beam_dir(i, j);
      std::optional<RayHit> best;
      for (int t : cand) {
        auto hit = ray_triangle(cfg.center, dir, mesh, t, cfg.max_range);
        if (hit && (!best || hit->range < best->range)) best = hit;
      }
      if (best) {
        frame.points.push_back(best->point);
        frame.labels.push_back(mesh.tri_part[best->triangle]);
      }
    }
  }
  return frame;
}

}  // namespace lhmp::sim
