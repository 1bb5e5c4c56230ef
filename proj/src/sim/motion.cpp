#include "lhmp/sim/motion.hpp"

#include <cmath>

#include "lhmp/rng.hpp"

namespace lhmp::sim {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

enum Joint : int {
  LHip = 1, RHip = 2, LKnee = 4, RKnee = 5, LAnkle = 7, RAnkle = 8,
  LShoulder = 16, RShoulder = 17, LElbow = 18, RElbow = 19,
};

struct MotionStyle {
  double phase = 0.0;
  double amp_scale = 1.0;
  double rate_scale = 1.0;
  double turn_dir = 1.0;
};

MotionStyle draw_style(MotionKind kind, std::uint64_t seed) {
  Rng rng(derive_seed(seed, hash_str("motion-style"), static_cast<std::uint64_t>(kind)));
  MotionStyle s;
  s.phase = rng.uniform(0.0, kTwoPi);
  s.amp_scale = rng.uniform(0.9, 1.1);
  s.rate_scale = rng.uniform(0.9, 1.1);
  s.turn_dir = rng.uniform() < 0.5 ? 1.0 : -1.0;
  return s;
}

// Arms hang near the body instead of the rest T-pose.
void drop_arms(PoseAngles& a, double amount) {
  a.local[LShoulder] = a.local[LShoulder] * Mat3::rot_y(amount);
  a.local[RShoulder] = a.local[RShoulder] * Mat3::rot_y(-amount);
}

PoseAngles angles_at(MotionKind kind, const MotionStyle& st, double t) {
  PoseAngles a;
  a.root_offset = Vec3{0, 0, 0};
  switch (kind) {
    case MotionKind::Still:
      break;
    case MotionKind::Walk: {
      // In-place gait: hips counter-swing, knees flex on the back-swing,
      // arms swing opposite to the legs. Angular rates keep the fastest
      // joint (the foot) under 0.3 m between frames at 10 fps.
      double w = kTwoPi * 0.8 * st.rate_scale;
      double s = std::sin(w * t + st.phase);
      double hip = 0.35 * st.amp_scale * s;
      a.local[LHip] = Mat3::rot_x(hip);
      a.local[RHip] = Mat3::rot_x(-hip);
      double knee_l = 0.5 * st.amp_scale * std::max(0.0, std::sin(w * t + st.phase + 0.6));
      double knee_r = 0.5 * st.amp_scale * std::max(0.0, std::sin(w * t + st.phase + 0.6 + kTwoPi / 2));
      a.local[LKnee] = Mat3::rot_x(knee_l);
      a.local[RKnee] = Mat3::rot_x(knee_r);
      drop_arms(a, 1.35);
      double arm = 0.3 * st.amp_scale * s;
      a.local[LShoulder] = a.local[LShoulder] * Mat3::rot_x(-arm);
      a.local[RShoulder] = a.local[RShoulder] * Mat3::rot_x(arm);
      a.root_offset = Vec3{0, 0, -0.02 * (1.0 - std::cos(2.0 * (w * t + st.phase))) * 0.5};
      break;
    }
    case MotionKind::Squat: {
      double w = kTwoPi * 0.35 * st.rate_scale;
      double depth = 0.65 * st.amp_scale * 0.5 * (1.0 - std::cos(w * t + st.phase));
      a.local[LHip] = Mat3::rot_x(-depth);
      a.local[RHip] = Mat3::rot_x(-depth);
      a.local[LKnee] = Mat3::rot_x(2.0 * depth);
      a.local[RKnee] = Mat3::rot_x(2.0 * depth);
      a.local[LAnkle] = Mat3::rot_x(-depth);
      a.local[RAnkle] = Mat3::rot_x(-depth);
      a.root_offset = Vec3{0, 0, -0.82 * (1.0 - std::cos(depth))};
      // Arms reach forward for balance.
      drop_arms(a, 1.35 - depth);
      break;
    }
    case MotionKind::ArmRaise: {
      double w = kTwoPi * 0.3 * st.rate_scale;
      double raise = 1.3 * st.amp_scale * 0.5 * (1.0 - std::cos(w * t + st.phase));
      a.local[LShoulder] = Mat3::rot_y(-raise);
      a.local[RShoulder] = Mat3::rot_y(raise);
      a.local[LElbow] = Mat3::rot_y(-0.2 * raise);
      a.local[RElbow] = Mat3::rot_y(0.2 * raise);
      break;
    }
    case MotionKind::Turn: {
      double w = 1.1 * st.rate_scale * st.turn_dir;
      a.local[0] = Mat3::rot_z(w * t);
      drop_arms(a, 1.35);
      break;
    }
  }
  return a;
}

}  // namespace

MotionKind motion_kind_from_string(const std::string& name) {
  if (name == "walk") return MotionKind::Walk;
  if (name == "squat") return MotionKind::Squat;
  if (name == "arm_raise") return MotionKind::ArmRaise;
  if (name == "turn") return MotionKind::Turn;
  if (name == "still") return MotionKind::Still;
  throw ConfigError("unknown motion kind: " + name);
}

const char* motion_kind_name(MotionKind kind) {
  switch (kind) {
    case MotionKind::Walk: return "walk";
    case MotionKind::Squat: return "squat";
    case MotionKind::ArmRaise: return "arm_raise";
    case MotionKind::Turn: return "turn";
    case MotionKind::Still: return "still";
  }
  throw ConfigError("unknown motion kind enum value");
}

std::vector<Pose> make_motion(MotionKind kind, int n_frames, double fps,
                              std::uint64_t seed) {
  LHMP_CHECK(n_frames >= 1, "make_motion: n_frames must be >= 1");
  LHMP_CHECK(fps > 0.0, "make_motion: fps must be positive");
  const HumanoidRig& rig = default_rig();
  const MotionStyle st = draw_style(kind, seed);
  std::vector<Pose> out;
  out.reserve(n_frames);
  for (int f = 0; f < n_frames; ++f) {
    if (kind == MotionKind::Still) {
      out.push_back(rig.rest_joints);
      continue;
    }
    double t = static_cast<double>(f) / fps;
    out.push_back(pose_from_angles(rig, angles_at(kind, st, t)));
  }
  return out;
}

}  // namespace lhmp::sim
