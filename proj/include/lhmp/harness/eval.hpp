#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "lhmp/harness/checkpoint.hpp"
#include "lhmp/harness/dataset.hpp"

namespace lhmp::harness {

// MPJPE per requested horizon, in world millimetres (predictions are
// de-normalized with each sample's stored centroid). For M > 1 checkpoints,
// mpjpe_mm tracks hypothesis 0 and min_mpjpe_mm the per-sample best
// hypothesis.
struct EvalReport {
  std::vector<int> horizons_ms;
  std::vector<double> mpjpe_mm;
  std::vector<double> min_mpjpe_mm;  // empty when M == 1
  double avg_short = 0.0;            // mean over 100..400 ms entries
  double avg_long = 0.0;             // mean over 600..1000 ms entries
  int n_samples = 0;
  int m_hypotheses = 1;
  std::uint64_t seed = 0;  // root seed of the evaluated checkpoint

  double at(int horizon_ms) const;
  double min_at(int horizon_ms) const;
  nlohmann::json to_json() const;
};

// Standard horizon grid {100..400, 600..1000} ms filtered to what t_pred
// covers at the dataset frame rate.
std::vector<int> default_horizons(int t_pred, double fps);

EvalReport evaluate(const SequenceStore& data, const Checkpoint& ckpt,
                    std::vector<int> horizons_ms = {});

struct SweepOptions {
  double occl_cube_side = 0.4;
  int n_noise_points = 30;
  double noise_radius = 0.3;
  std::uint64_t seed = 99;
  std::vector<int> horizons_ms;  // empty = defaults
};

struct SweepResult {
  std::string mode;             // occlusion | noise | distance
  std::vector<double> levels;   // percent of frames, or distance bin edges
  std::vector<EvalReport> reports;
  std::uint64_t seed = 0;       // sweep augmentation seed
  nlohmann::json to_json() const;
};

// occlusion/noise: re-augments an in-memory copy of the dataset at each level
// (percent of frames per sequence, nested across levels) and evaluates.
// distance: levels are bin edges in meters; sequences fall into [e_i, e_i+1).
SweepResult robustness_sweep(const SequenceStore& data, const Checkpoint& ckpt,
                             const std::string& mode, const std::vector<double>& levels,
                             const SweepOptions& opts = {});

// De-normalized predicted future poses for one sample, all hypotheses.
struct Prediction {
  int sample_index = 0;
  Vec3 centroid;
  std::vector<std::vector<Pose>> hypotheses_world;
  std::vector<Pose> gt_future_world;
};

Prediction predict_sample(const SequenceStore& data, const Checkpoint& ckpt,
                          int sample_index);

}  // namespace lhmp::harness
