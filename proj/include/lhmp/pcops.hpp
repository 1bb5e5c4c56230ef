#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lhmp/common.hpp"

namespace lhmp::pcops {

// A frame after resampling and centering. `centroid` is the offset that was
// subtracted; it is the centroid of the pre-padding point set, so predictions
// can be lifted back to world coordinates.
struct ProcessedFrame {
  std::vector<Vec3> points;
  std::vector<std::uint8_t> labels;
  Vec3 centroid;
  int source_count = 0;
};

// Per-part index bins over a frame. Noise-labeled indices go to `noise` and
// are excluded from the K part bins; `nonempty[k]` flags bins that received
// at least one point (empty bins yield an all-zeros part token downstream).
struct PartBins {
  std::array<std::vector<int>, kNumParts> bins;
  std::array<bool, kNumParts> nonempty{};
  std::vector<int> noise;
};

// Farthest point sampling. Seeded at the point farthest from the centroid,
// then greedily maximizes the minimum distance to the selected set. Ties pick
// the lowest index. If `n_target` exceeds the input size, all indices are
// returned followed by repeats of index 0.
std::vector<int> farthest_point_sample(const std::vector<Vec3>& points, int n_target);

// Subtracts the frame centroid (computed here) from every point.
ProcessedFrame center_normalize(const std::vector<Vec3>& points,
                                const std::vector<std::uint8_t>& labels);

// Same, but with an externally chosen centroid (the harness centers every
// frame of a motion window by one shared offset so inter-frame translation
// survives normalization).
ProcessedFrame center_with(const std::vector<Vec3>& points,
                           const std::vector<std::uint8_t>& labels,
                           const Vec3& centroid);

PartBins bin_by_part(const std::vector<std::uint8_t>& labels);

// Symmetric Chamfer distance: mean squared nearest-neighbor distance in both
// directions, in m^2.
double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

// Mean per-joint position error in millimetres, one value per timestamp.
std::vector<double> mpjpe(const std::vector<Pose>& pred, const std::vector<Pose>& gt);

// Mean MPJPE over a subset of timestamps (indices into the pose sequence).
double mpjpe_mean(const std::vector<Pose>& pred, const std::vector<Pose>& gt,
                  const std::vector<int>& timestamps);

struct MinMpjpeResult {
  double value_mm = 0.0;
  int argmin = -1;
};

// Minimum over hypotheses of the mean-over-horizon MPJPE.
MinMpjpeResult min_mpjpe(const std::vector<std::vector<Pose>>& hypotheses,
                         const std::vector<Pose>& gt,
                         const std::vector<int>& timestamps);

}  // namespace lhmp::pcops
