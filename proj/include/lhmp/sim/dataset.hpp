#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lhmp/sim/augment.hpp"
#include "lhmp/sim/motion.hpp"

namespace lhmp::sim {

struct SynthParams {
  int n_sequences = 200;
  int frames_per_sequence = 14;
  double fps = 10.0;
  double dist_min = 6.0;
  double dist_max = 27.0;
  double noise_frame_ratio = 0.0;  // fraction of frames that get noise points
  double occl_frame_ratio = 0.0;   // fraction of frames that get a cutout
  int n_noise_points = 30;
  double noise_radius = 0.3;
  double occl_cube_side = 0.4;
  int segments_per_capsule = 8;
  std::uint64_t seed = 1;
  ScanConfig scan;  // scan.distance is overridden per sequence
};

// Picks which frames of a sequence receive an augmentation: exactly
// ceil(ratio * n_frames) of them, chosen by ranking per-frame hashes so the
// selected set at a lower ratio is a subset of the set at any higher ratio.
std::vector<bool> select_augmented_frames(int n_frames, double ratio,
                                          std::uint64_t seed, std::uint64_t sequence,
                                          const char* purpose);

// Generates the synthetic dataset into `out_dir`: one seq_NNNN.lhmp per
// sequence plus manifest.json recording all parameters, the seed and
// per-frame augmentation flags. Byte-identical for identical arguments.
void synth_dataset(const std::filesystem::path& out_dir, const SynthParams& params);

}  // namespace lhmp::sim
