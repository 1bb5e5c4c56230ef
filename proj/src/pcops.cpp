#include "lhmp/pcops.hpp"

#include <limits>

namespace lhmp::pcops {

std::vector<int> farthest_point_sample(const std::vector<Vec3>& points, int n_target) {
  const int m = static_cast<int>(points.size());
  LHMP_CHECK(m >= 1, "farthest_point_sample: empty input");
  LHMP_CHECK(n_target >= 1, "farthest_point_sample: n_target must be >= 1");

  Vec3 centroid;
  for (const Vec3& p : points) centroid += p;
  centroid = centroid / static_cast<double>(m);

  // Seed: farthest from centroid, lowest index on ties.
  int seed = 0;
  double best = -1.0;
  for (int i = 0; i < m; ++i) {
    double d = (points[i] - centroid).norm2();
    if (d > best) {
      best = d;
      seed = i;
    }
  }

  std::vector<int> picked;
  picked.reserve(n_target);
  picked.push_back(seed);

  std::vector<double> min_dist(m, std::numeric_limits<double>::infinity());
  int last = seed;
  while (static_cast<int>(picked.size()) < n_target && static_cast<int>(picked.size()) < m) {
    int next = -1;
    double next_dist = -1.0;
    for (int i = 0; i < m; ++i) {
      double d = (points[i] - points[last]).norm2();
      if (d < min_dist[i]) min_dist[i] = d;
      if (min_dist[i] > next_dist) {
        next_dist = min_dist[i];
        next = i;
      }
    }
    picked.push_back(next);
    last = next;
  }

  // Padding rule for sparse frames: repeat index 0 up to the target size.
  while (static_cast<int>(picked.size()) < n_target) picked.push_back(0);
  return picked;
}

ProcessedFrame center_normalize(const std::vector<Vec3>& points,
                                const std::vector<std::uint8_t>& labels) {
  LHMP_CHECK(!points.empty(), "center_normalize: empty input");
  Vec3 centroid;
  for (const Vec3& p : points) centroid += p;
  centroid = centroid / static_cast<double>(points.size());
  return center_with(points, labels, centroid);
}

ProcessedFrame center_with(const std::vector<Vec3>& points,
                           const std::vector<std::uint8_t>& labels,
                           const Vec3& centroid) {
  LHMP_CHECK(!points.empty(), "center_normalize: empty input");
  LHMP_CHECK(labels.size() == points.size(), "center_normalize: labels/points size mismatch");
  ProcessedFrame out;
  out.points.reserve(points.size());
  for (const Vec3& p : points) out.points.push_back(p - centroid);
  out.labels = labels;
  out.centroid = centroid;
  out.source_count = static_cast<int>(points.size());
  return out;
}

PartBins bin_by_part(const std::vector<std::uint8_t>& labels) {
  PartBins out;
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
    std::uint8_t l = labels[i];
    if (l == kNoiseLabel) {
      out.noise.push_back(i);
    } else if (l < kNumParts) {
      out.bins[l].push_back(i);
      out.nonempty[l] = true;
    } else {
      throw ContractError(detail::format_msg("bin_by_part: corrupt label ", int(l), " at index ", i));
    }
  }
  return out;
}

double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  LHMP_CHECK(!a.empty() && !b.empty(), "chamfer: empty point set");
  auto directed = [](const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
    double sum = 0.0;
    for (const Vec3& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& q : to) {
        double d = (p - q).norm2();
        if (d < best) best = d;
      }
      sum += best;
    }
    return sum / static_cast<double>(from.size());
  };
  return directed(a, b) + directed(b, a);
}

std::vector<double> mpjpe(const std::vector<Pose>& pred, const std::vector<Pose>& gt) {
  LHMP_CHECK(pred.size() == gt.size(), "mpjpe: timestamp count mismatch (", pred.size(),
             " vs ", gt.size(), ")");
  std::vector<double> out(pred.size());
  for (size_t t = 0; t < pred.size(); ++t) {
    double sum = 0.0;
    for (int j = 0; j < kNumJoints; ++j) sum += (pred[t][j] - gt[t][j]).norm();
    out[t] = sum / kNumJoints * 1000.0;  // meters -> mm
  }
  return out;
}

double mpjpe_mean(const std::vector<Pose>& pred, const std::vector<Pose>& gt,
                  const std::vector<int>& timestamps) {
  LHMP_CHECK(!timestamps.empty(), "mpjpe_mean: empty timestamp set");
  std::vector<double> per_t = mpjpe(pred, gt);
  double sum = 0.0;
  for (int t : timestamps) {
    LHMP_CHECK(t >= 0 && t < static_cast<int>(per_t.size()), "mpjpe_mean: timestamp ", t,
               " out of range");
    sum += per_t[t];
  }
  return sum / static_cast<double>(timestamps.size());
}

MinMpjpeResult min_mpjpe(const std::vector<std::vector<Pose>>& hypotheses,
                         const std::vector<Pose>& gt,
                         const std::vector<int>& timestamps) {
  LHMP_CHECK(!hypotheses.empty(), "min_mpjpe: no hypotheses");
  MinMpjpeResult r;
  r.value_mm = std::numeric_limits<double>::infinity();
  for (int m = 0; m < static_cast<int>(hypotheses.size()); ++m) {
    double v = mpjpe_mean(hypotheses[m], gt, timestamps);
    if (v < r.value_mm) {
      r.value_mm = v;
      r.argmin = m;
    }
  }
  return r;
}

}  // namespace lhmp::pcops
