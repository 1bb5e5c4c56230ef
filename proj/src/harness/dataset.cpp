#include "lhmp/harness/dataset.hpp"

#include <algorithm>

#include <json.hpp>

#include "lhmp/io/lhmp_file.hpp"

namespace lhmp::harness {

using nlohmann::json;

SequenceStore load_dataset(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("dataset directory not found: " + dir.string());

  SequenceStore store;
  store.dir = dir;

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".lhmp") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no .lhmp sequences in " + dir.string());

  bool fps_set = false;
  for (const auto& f : files) {
    Sequence seq;
    double fps = 0.0;
    seq.frames = io::read_sequence(f, &fps);
    seq.file = f.filename().string();
    if (!fps_set) {
      store.fps = fps;
      fps_set = true;
    } else if (std::abs(store.fps - fps) > 1e-6) {
      throw IoError("mixed frame rates in dataset " + dir.string());
    }
    store.sequences.push_back(std::move(seq));
  }

  fs::path manifest = dir / "manifest.json";
  if (fs::exists(manifest)) {
    json m = json::parse(io::read_file(manifest));
    store.has_manifest = true;
    store.manifest_seed = m.value("seed", std::uint64_t{0});
    if (m.contains("sequences")) {
      for (const auto& entry : m["sequences"]) {
        std::string file = entry.value("file", "");
        for (auto& seq : store.sequences) {
          if (seq.file == file) {
            seq.distance_m = entry.value("distance_m", -1.0);
            seq.motion = entry.value("motion", "");
          }
        }
      }
    }
  }
  return store;
}

std::vector<MotionSample> window_samples(const SequenceStore& store, int t_obs,
                                         int t_pred, int stride, int n_points,
                                         int* dropped) {
  LHMP_CHECK(t_obs >= 1 && t_pred >= 1, "window_samples: bad window lengths");
  LHMP_CHECK(stride >= 1, "window_samples: stride must be >= 1");
  const int window = t_obs + t_pred;
  int drop_count = 0;

  std::vector<MotionSample> out;
  for (int q = 0; q < static_cast<int>(store.sequences.size()); ++q) {
    const auto& frames = store.sequences[q].frames;
    const int len = static_cast<int>(frames.size());
    for (int start = 0; start + window <= len; start += stride) {
      bool empty_observed = false;
      for (int t = 0; t < t_obs; ++t)
        if (frames[start + t].points.empty()) empty_observed = true;
      if (empty_observed) {
        ++drop_count;
        continue;
      }

      MotionSample s;
      s.sequence = q;
      s.start = start;
      s.t_obs = t_obs;
      s.t_pred = t_pred;
      s.n_points = n_points;

      // Shared window centroid over the observed frames' sampled (pre-pad)
      // point sets.
      std::vector<std::vector<int>> picks(t_obs);
      Vec3 centroid;
      int pooled = 0;
      for (int t = 0; t < t_obs; ++t) {
        const auto& fr = frames[start + t];
        picks[t] = pcops::farthest_point_sample(fr.points, n_points);
        int distinct = std::min<int>(static_cast<int>(fr.points.size()), n_points);
        for (int i = 0; i < distinct; ++i) centroid += fr.points[picks[t][i]];
        pooled += distinct;
      }
      centroid = centroid / static_cast<double>(pooled);
      s.centroid = centroid;

      for (int t = 0; t < t_obs; ++t) {
        const auto& fr = frames[start + t];
        std::vector<Vec3> pts(n_points);
        std::vector<std::uint8_t> labels(n_points);
        for (int i = 0; i < n_points; ++i) {
          pts[i] = fr.points[picks[t][i]];
          labels[i] = fr.labels[picks[t][i]];
        }
        pcops::ProcessedFrame pf = pcops::center_with(pts, labels, centroid);
        pf.source_count = static_cast<int>(fr.points.size());
        s.observed.push_back(std::move(pf));
      }
      for (int t = 0; t < window; ++t) {
        const auto& fr = frames[start + t];
        s.gt_joints_world.push_back(fr.gt_joints);
        s.clouds_world.push_back(fr.points);
      }
      out.push_back(std::move(s));
    }
  }
  if (dropped) *dropped = drop_count;
  return out;
}

template <class S>
model::SampleInput<S> to_sample_input(const MotionSample& sample) {
  model::SampleInput<S> in;
  in.observed.reserve(sample.t_obs);
  for (const auto& pf : sample.observed) {
    model::FrameInput<S> fr;
    fr.points_xyz.reserve(pf.points.size() * 3);
    for (const Vec3& p : pf.points) {
      fr.points_xyz.push_back(static_cast<S>(p.x));
      fr.points_xyz.push_back(static_cast<S>(p.y));
      fr.points_xyz.push_back(static_cast<S>(p.z));
    }
    fr.bins = pcops::bin_by_part(pf.labels);
    in.observed.push_back(std::move(fr));
  }

  const int t = sample.t_obs + sample.t_pred;
  in.gt_joints.reserve(static_cast<size_t>(t) * kNumJoints * 3);
  for (int ti = 0; ti < t; ++ti) {
    for (int j = 0; j < kNumJoints; ++j) {
      Vec3 p = sample.gt_joints_world[ti][j] - sample.centroid;
      in.gt_joints.push_back(static_cast<S>(p.x));
      in.gt_joints.push_back(static_cast<S>(p.y));
      in.gt_joints.push_back(static_cast<S>(p.z));
    }
  }
  in.gt_clouds.resize(t);
  for (int ti = 0; ti < t; ++ti) {
    in.gt_clouds[ti].reserve(sample.clouds_world[ti].size() * 3);
    for (const Vec3& p : sample.clouds_world[ti]) {
      Vec3 c = p - sample.centroid;
      in.gt_clouds[ti].push_back(static_cast<S>(c.x));
      in.gt_clouds[ti].push_back(static_cast<S>(c.y));
      in.gt_clouds[ti].push_back(static_cast<S>(c.z));
    }
  }
  return in;
}

template model::SampleInput<float> to_sample_input<float>(const MotionSample&);
template model::SampleInput<double> to_sample_input<double>(const MotionSample&);

}  // namespace lhmp::harness
