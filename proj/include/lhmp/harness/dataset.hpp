#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lhmp/model/network.hpp"
#include "lhmp/pcops.hpp"
#include "lhmp/sim/scan.hpp"

namespace lhmp::harness {

struct Sequence {
  std::vector<sim::ScanFrame> frames;
  std::string file;
  std::string motion;
  double distance_m = -1.0;  // from the manifest; -1 when unknown
};

struct SequenceStore {
  std::vector<Sequence> sequences;
  double fps = 10.0;
  std::filesystem::path dir;
  bool has_manifest = false;
  std::uint64_t manifest_seed = 0;
};

// Reads every seq_*.lhmp (sorted by name) plus manifest.json when present.
SequenceStore load_dataset(const std::filesystem::path& dir);

// One sliding window: t_obs observed frames preprocessed for the network plus
// the ground truth for all t_obs + t_pred frames. All frames of a window are
// centered by one shared centroid (mean of the observed frames' sampled
// points) so the targets keep inter-frame translation.
struct MotionSample {
  int sequence = 0;
  int start = 0;
  int t_obs = 0, t_pred = 0, n_points = 0;

  std::vector<pcops::ProcessedFrame> observed;
  Vec3 centroid;
  std::vector<Pose> gt_joints_world;             // t_obs + t_pred
  std::vector<std::vector<Vec3>> clouds_world;   // t_obs + t_pred, raw

  const std::vector<Pose> future_gt_world() const {
    return {gt_joints_world.begin() + t_obs, gt_joints_world.end()};
  }
};

// Windows never cross sequence boundaries; windows whose observed frames
// contain an empty scan are dropped (occlusion can empty a frame) and counted
// in `dropped` when given.
std::vector<MotionSample> window_samples(const SequenceStore& store, int t_obs,
                                         int t_pred, int stride, int n_points,
                                         int* dropped = nullptr);

// Converts a sample into the network's normalized input/target layout.
template <class S>
model::SampleInput<S> to_sample_input(const MotionSample& sample);

}  // namespace lhmp::harness
