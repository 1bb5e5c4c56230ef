#pragma once

#include <cstdint>
#include <filesystem>

#include "lhmp/ad/adam.hpp"
#include "lhmp/model/config.hpp"

namespace lhmp::harness {

// Full training state: manifest.json (config, counters, tensor directory)
// plus params.bin (float32 little-endian blobs). Save -> load -> save is
// byte-identical, and a resumed run continues bit-exactly because every
// random choice is derived from (seed, epoch).
struct Checkpoint {
  model::ModelConfig config;
  ad::ParamStore<float> params;
  ad::AdamState<float> adam;
  std::uint64_t seed = 0;
  int epoch = 0;  // completed epochs
  double lr = 2e-3;
  int batch = 8;
  int epochs = 0;
  int stride = 1;
  double fps = 10.0;  // frame rate of the training data
};

void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace lhmp::harness
