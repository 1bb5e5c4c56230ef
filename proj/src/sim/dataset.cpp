#include "lhmp/sim/dataset.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "lhmp/io/lhmp_file.hpp"
#include "lhmp/rng.hpp"

namespace lhmp::sim {

using nlohmann::json;

std::vector<bool> select_augmented_frames(int n_frames, double ratio,
                                          std::uint64_t seed, std::uint64_t sequence,
                                          const char* purpose) {
  LHMP_CONFIG_CHECK(ratio >= 0.0 && ratio <= 1.0, "augmentation ratio out of [0,1]: ", ratio);
  std::vector<bool> out(n_frames, false);
  int n_pick = static_cast<int>(std::ceil(ratio * n_frames));
  if (n_pick <= 0) return out;
  n_pick = std::min(n_pick, n_frames);

  std::vector<std::pair<std::uint64_t, int>> ranked(n_frames);
  for (int f = 0; f < n_frames; ++f)
    ranked[f] = {derive_seed(seed, hash_str(purpose), sequence, static_cast<std::uint64_t>(f)), f};
  std::sort(ranked.begin(), ranked.end());
  for (int k = 0; k < n_pick; ++k) out[ranked[k].second] = true;
  return out;
}

void synth_dataset(const std::filesystem::path& out_dir, const SynthParams& p) {
  LHMP_CONFIG_CHECK(p.n_sequences >= 1, "synth: need at least one sequence");
  LHMP_CONFIG_CHECK(p.frames_per_sequence >= 1, "synth: need at least one frame");
  LHMP_CONFIG_CHECK(p.noise_frame_ratio >= 0.0 && p.noise_frame_ratio <= 1.0,
                    "synth: noise ratio out of [0,1]");
  LHMP_CONFIG_CHECK(p.occl_frame_ratio >= 0.0 && p.occl_frame_ratio <= 1.0,
                    "synth: occlusion ratio out of [0,1]");
  LHMP_CONFIG_CHECK(p.dist_min > 0.0 && p.dist_max >= p.dist_min,
                    "synth: bad distance range");
  p.scan.validate();

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create dataset directory " + out_dir.string());

  const HumanoidRig& rig = default_rig();
  constexpr MotionKind kKinds[] = {MotionKind::Walk, MotionKind::Squat,
                                   MotionKind::ArmRaise, MotionKind::Turn,
                                   MotionKind::Still};

  json manifest;
  manifest["format"] = "lhmp-dataset";
  manifest["version"] = 1;
  manifest["seed"] = p.seed;
  manifest["fps"] = p.fps;
  manifest["n_sequences"] = p.n_sequences;
  manifest["frames_per_sequence"] = p.frames_per_sequence;
  manifest["distance_range_m"] = {p.dist_min, p.dist_max};
  manifest["noise_frame_ratio"] = p.noise_frame_ratio;
  manifest["occl_frame_ratio"] = p.occl_frame_ratio;
  manifest["n_noise_points"] = p.n_noise_points;
  manifest["noise_radius_m"] = p.noise_radius;
  manifest["occl_cube_side_m"] = p.occl_cube_side;
  manifest["segments_per_capsule"] = p.segments_per_capsule;
  manifest["scan"] = {{"n_azimuth", p.scan.n_azimuth},
                      {"n_elevation", p.scan.n_elevation},
                      {"elevation_min_rad", p.scan.elevation_min},
                      {"elevation_max_rad", p.scan.elevation_max},
                      {"max_range_m", p.scan.max_range},
                      {"center", {p.scan.center.x, p.scan.center.y, p.scan.center.z}}};
  manifest["sequences"] = json::array();

  for (int q = 0; q < p.n_sequences; ++q) {
    Rng seq_rng(derive_seed(p.seed, hash_str("sequence"), static_cast<std::uint64_t>(q)));
    MotionKind kind = kKinds[q % 5];
    double distance = seq_rng.uniform(p.dist_min, p.dist_max);
    std::uint64_t motion_seed = derive_seed(p.seed, hash_str("motion"), q);

    std::vector<Pose> poses =
        make_motion(kind, p.frames_per_sequence, p.fps, motion_seed);
    std::vector<bool> occl = select_augmented_frames(p.frames_per_sequence,
                                                     p.occl_frame_ratio, p.seed, q, "occl");
    std::vector<bool> noise = select_augmented_frames(p.frames_per_sequence,
                                                      p.noise_frame_ratio, p.seed, q, "noise");

    std::vector<ScanFrame> frames;
    frames.reserve(p.frames_per_sequence);
    for (int f = 0; f < p.frames_per_sequence; ++f) {
      Pose pose = poses[f];
      for (Vec3& j : pose) j.y += distance;  // place the body down-range
      LabeledMesh mesh = skin_rig(rig, pose, p.segments_per_capsule);
      ScanFrame frame = ray_cast(mesh, p.scan);
      frame.gt_joints = pose;
      frame.timestamp = f / p.fps;
      if (occl[f])
        frame = inject_occlusion(frame, p.occl_cube_side,
                                 derive_seed(p.seed, hash_str("occl-rng"), q, f));
      if (noise[f])
        frame = inject_noise(frame, p.n_noise_points, p.noise_radius,
                             derive_seed(p.seed, hash_str("noise-rng"), q, f));
      frame.gt_joints = pose;
      frames.push_back(std::move(frame));
    }

    char name[32];
    std::snprintf(name, sizeof(name), "seq_%04d.lhmp", q);
    io::write_sequence(out_dir / name, frames, p.fps);

    json seq;
    seq["file"] = name;
    seq["motion"] = motion_kind_name(kind);
    seq["distance_m"] = distance;
    seq["occluded_frames"] = json::array();
    seq["noised_frames"] = json::array();
    for (int f = 0; f < p.frames_per_sequence; ++f) {
      if (occl[f]) seq["occluded_frames"].push_back(f);
      if (noise[f]) seq["noised_frames"].push_back(f);
    }
    manifest["sequences"].push_back(seq);
  }

  io::atomic_write(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace lhmp::sim
