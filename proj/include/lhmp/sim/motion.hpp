#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lhmp/sim/rig.hpp"

namespace lhmp::sim {

enum class MotionKind { Walk, Squat, ArmRaise, Turn, Still };

MotionKind motion_kind_from_string(const std::string& name);
const char* motion_kind_name(MotionKind kind);

// Procedural joint-angle animation on the default rig. Deterministic for a
// fixed (kind, seed); per-frame joint displacement stays below 0.3 m at 10 fps.
std::vector<Pose> make_motion(MotionKind kind, int n_frames, double fps,
                              std::uint64_t seed);

}  // namespace lhmp::sim
