#pragma once

#include <cstdint>

#include "lhmp/sim/scan.hpp"

namespace lhmp::sim {

// Appends n_noise points labeled NOISE, sampled uniformly from the shell of
// width `radius` around the axis-aligned bounding box of the body points.
// Existing points are untouched. An empty frame is returned unchanged and
// `warned_empty` (if given) is set.
ScanFrame inject_noise(const ScanFrame& frame, int n_noise, double radius,
                       std::uint64_t seed, bool* warned_empty = nullptr);

// Removes every point strictly inside an axis-aligned cube of side
// `cube_side` centered on a randomly chosen existing body point. Ground-truth
// joints are untouched; empty frames are returned unchanged.
ScanFrame inject_occlusion(const ScanFrame& frame, double cube_side,
                           std::uint64_t seed);

}  // namespace lhmp::sim
