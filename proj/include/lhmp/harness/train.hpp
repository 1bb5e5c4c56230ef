#pragma once

#include <array>
#include <filesystem>

#include "lhmp/harness/checkpoint.hpp"
#include "lhmp/harness/dataset.hpp"

namespace lhmp::harness {

struct TrainOptions {
  model::ModelConfig config;
  double lr = 2e-3;
  int batch = 8;
  int epochs = 300;
  int stride = 1;
  std::uint64_t seed = 1;
  int max_steps = 0;  // 0 = run all epochs
  std::filesystem::path checkpoint_dir;  // empty = keep in memory only
  std::filesystem::path loss_csv;        // empty = no curve file
};

struct CurvePoint {
  std::int64_t step;
  double loss, l_initial, l_final, l_cd;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<CurvePoint> curve;
  int train_samples = 0;
  int val_samples = 0;
};

// Seeded, deterministic training. Batches are summed in fixed sample order
// (worker threads fill per-sample gradient slots), so reruns and resumed runs
// are bit-identical. Uses the winner-take-all loss when m_hypotheses > 1.
// A checkpoint is written after every epoch when checkpoint_dir is set.
TrainResult train(const SequenceStore& data, const TrainOptions& opts,
                  const Checkpoint* resume = nullptr);

}  // namespace lhmp::harness
