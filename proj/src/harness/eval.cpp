#include "lhmp/harness/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "lhmp/rng.hpp"
#include "lhmp/sim/augment.hpp"
#include "lhmp/sim/dataset.hpp"

namespace lhmp::harness {

using nlohmann::json;

double EvalReport::at(int horizon_ms) const {
  for (size_t i = 0; i < horizons_ms.size(); ++i)
    if (horizons_ms[i] == horizon_ms) return mpjpe_mm[i];
  throw ContractError(detail::format_msg("horizon ", horizon_ms, " ms not in report"));
}

double EvalReport::min_at(int horizon_ms) const {
  LHMP_CHECK(!min_mpjpe_mm.empty(), "report has no diverse metrics (M == 1)");
  for (size_t i = 0; i < horizons_ms.size(); ++i)
    if (horizons_ms[i] == horizon_ms) return min_mpjpe_mm[i];
  throw ContractError(detail::format_msg("horizon ", horizon_ms, " ms not in report"));
}

json EvalReport::to_json() const {
  json mp;
  for (size_t i = 0; i < horizons_ms.size(); ++i)
    mp["h" + std::to_string(horizons_ms[i])] = mpjpe_mm[i];
  mp["avg_short"] = avg_short;
  mp["avg_long"] = avg_long;
  json j;
  j["mpjpe_mm"] = mp;
  if (!min_mpjpe_mm.empty()) {
    json mn;
    for (size_t i = 0; i < horizons_ms.size(); ++i)
      mn["h" + std::to_string(horizons_ms[i])] = min_mpjpe_mm[i];
    j["min_mpjpe_mm"] = mn;
  }
  j["n_samples"] = n_samples;
  j["m_hypotheses"] = m_hypotheses;
  j["seed"] = std::to_string(seed);
  return j;
}

std::vector<int> default_horizons(int t_pred, double fps) {
  std::vector<int> all = {100, 200, 300, 400, 600, 800, 1000};
  std::vector<int> out;
  for (int h : all) {
    int frame = static_cast<int>(std::lround(h / 1000.0 * fps));
    if (frame >= 1 && frame <= t_pred) out.push_back(h);
  }
  return out;
}

EvalReport evaluate(const SequenceStore& data, const Checkpoint& ckpt,
                    std::vector<int> horizons_ms) {
  LHMP_CHECK(std::abs(data.fps - ckpt.fps) < 1e-6, "evaluate: dataset fps ", data.fps,
             " differs from checkpoint fps ", ckpt.fps);
  const model::ModelConfig& cfg = ckpt.config;
  if (horizons_ms.empty()) horizons_ms = default_horizons(cfg.t_pred, data.fps);
  LHMP_CHECK(!horizons_ms.empty(), "evaluate: no horizons fit t_pred=", cfg.t_pred);

  // Horizon -> future-frame index, with the contract check up front.
  std::vector<int> frame_of(horizons_ms.size());
  for (size_t i = 0; i < horizons_ms.size(); ++i) {
    int frame = static_cast<int>(std::lround(horizons_ms[i] / 1000.0 * data.fps));
    LHMP_CHECK(frame >= 1 && frame <= cfg.t_pred, "evaluate: horizon ", horizons_ms[i],
               " ms maps to frame ", frame, ", beyond t_pred=", cfg.t_pred);
    frame_of[i] = frame - 1;
  }

  std::vector<MotionSample> samples =
      window_samples(data, cfg.t_obs, cfg.t_pred, 1, cfg.n_points);
  LHMP_CHECK(!samples.empty(), "evaluate: dataset yields no complete windows");

  model::Network<float> net(cfg);
  const int n = static_cast<int>(samples.size());
  const int m = cfg.m_hypotheses;

  // per sample x horizon: hypothesis-0 error and min-over-hypotheses error
  std::vector<std::vector<double>> err0(n), errmin(n);

  auto run_sample = [&](int si) {
    const MotionSample& s = samples[si];
    auto input = to_sample_input<float>(s);
    ad::Graph<float> g;
    ad::ParamBinder<float> bind(g, ckpt.params, /*trainable=*/false);
    auto outs = net.forward_diverse(g, bind, input);

    std::vector<Pose> gt = s.future_gt_world();
    err0[si].assign(horizons_ms.size(), 0.0);
    errmin[si].assign(horizons_ms.size(), std::numeric_limits<double>::infinity());
    for (int h = 0; h < m; ++h) {
      std::vector<Pose> pred = net.future_poses(g, outs[h]);
      for (Pose& p : pred)
        for (Vec3& v : p) v += s.centroid;  // back to world coordinates
      std::vector<double> per_t = pcops::mpjpe(pred, gt);
      for (size_t i = 0; i < frame_of.size(); ++i) {
        double e = per_t[frame_of[i]];
        if (h == 0) err0[si][i] = e;
        errmin[si][i] = std::min(errmin[si][i], e);
      }
    }
  };

  int n_threads = std::min(worker_threads(), n);
  if (n_threads <= 1) {
    for (int i = 0; i < n; ++i) run_sample(i);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t)
      pool.emplace_back([&, t]() {
        for (int i = t; i < n; i += n_threads) run_sample(i);
      });
    for (auto& th : pool) th.join();
  }

  EvalReport report;
  report.horizons_ms = horizons_ms;
  report.n_samples = n;
  report.m_hypotheses = m;
  report.seed = ckpt.seed;
  report.mpjpe_mm.assign(horizons_ms.size(), 0.0);
  if (m > 1) report.min_mpjpe_mm.assign(horizons_ms.size(), 0.0);
  for (int i = 0; i < n; ++i) {  // fixed order
    for (size_t k = 0; k < horizons_ms.size(); ++k) {
      report.mpjpe_mm[k] += err0[i][k];
      if (m > 1) report.min_mpjpe_mm[k] += errmin[i][k];
    }
  }
  for (size_t k = 0; k < horizons_ms.size(); ++k) {
    report.mpjpe_mm[k] /= n;
    if (m > 1) report.min_mpjpe_mm[k] /= n;
  }

  double sum_s = 0, sum_l = 0;
  int n_s = 0, n_l = 0;
  for (size_t k = 0; k < horizons_ms.size(); ++k) {
    if (horizons_ms[k] <= 400) {
      sum_s += report.mpjpe_mm[k];
      ++n_s;
    } else {
      sum_l += report.mpjpe_mm[k];
      ++n_l;
    }
  }
  report.avg_short = n_s ? sum_s / n_s : 0.0;
  report.avg_long = n_l ? sum_l / n_l : 0.0;
  return report;
}

json SweepResult::to_json() const {
  json rows = json::array();
  for (size_t i = 0; i < levels.size(); ++i) {
    json r = reports[i].to_json();
    r["level"] = levels[i];
    rows.push_back(r);
  }
  json j;
  j["sweeps"][mode] = rows;
  j["sweep_seed"] = std::to_string(seed);
  return j;
}

namespace {

SequenceStore augment_copy(const SequenceStore& data, const std::string& mode,
                           double percent, const SweepOptions& opts) {
  SequenceStore aug = data;
  double ratio = percent / 100.0;
  LHMP_CONFIG_CHECK(ratio >= 0.0 && ratio <= 1.0, "sweep level out of [0,100]: ", percent);
  for (int q = 0; q < static_cast<int>(aug.sequences.size()); ++q) {
    auto& frames = aug.sequences[q].frames;
    std::vector<bool> sel = sim::select_augmented_frames(
        static_cast<int>(frames.size()), ratio, opts.seed, q,
        mode == "occlusion" ? "sweep-occl" : "sweep-noise");
    for (int f = 0; f < static_cast<int>(frames.size()); ++f) {
      if (!sel[f]) continue;
      if (mode == "occlusion")
        frames[f] = sim::inject_occlusion(frames[f], opts.occl_cube_side,
                                          derive_seed(opts.seed, hash_str("sweep-occl-rng"), q, f));
      else
        frames[f] = sim::inject_noise(frames[f], opts.n_noise_points, opts.noise_radius,
                                      derive_seed(opts.seed, hash_str("sweep-noise-rng"), q, f));
    }
  }
  return aug;
}

}  // namespace

SweepResult robustness_sweep(const SequenceStore& data, const Checkpoint& ckpt,
                             const std::string& mode, const std::vector<double>& levels,
                             const SweepOptions& opts) {
  LHMP_CONFIG_CHECK(mode == "occlusion" || mode == "noise" || mode == "distance",
                    "sweep: unknown mode '", mode, "'");
  LHMP_CHECK(!levels.empty(), "sweep: no levels given");

  SweepResult result;
  result.mode = mode;
  result.seed = opts.seed;

  if (mode == "distance") {
    LHMP_CHECK(data.has_manifest, "distance sweep needs a dataset manifest with distances");
    LHMP_CHECK(levels.size() >= 2, "distance sweep needs at least two bin edges");
    for (size_t b = 0; b + 1 < levels.size(); ++b) {
      double lo = levels[b], hi = levels[b + 1];
      SequenceStore subset;
      subset.fps = data.fps;
      subset.dir = data.dir;
      subset.has_manifest = data.has_manifest;
      for (const auto& seq : data.sequences)
        if (seq.distance_m >= lo && seq.distance_m < hi) subset.sequences.push_back(seq);
      result.levels.push_back(lo);
      if (subset.sequences.empty()) {
        EvalReport empty;
        empty.horizons_ms = opts.horizons_ms.empty()
                                ? default_horizons(ckpt.config.t_pred, data.fps)
                                : opts.horizons_ms;
        empty.mpjpe_mm.assign(empty.horizons_ms.size(), 0.0);
        empty.m_hypotheses = ckpt.config.m_hypotheses;
        result.reports.push_back(empty);
      } else {
        result.reports.push_back(evaluate(subset, ckpt, opts.horizons_ms));
      }
    }
    return result;
  }

  for (double level : levels) {
    SequenceStore aug = augment_copy(data, mode, level, opts);
    result.levels.push_back(level);
    result.reports.push_back(evaluate(aug, ckpt, opts.horizons_ms));
  }
  return result;
}

Prediction predict_sample(const SequenceStore& data, const Checkpoint& ckpt,
                          int sample_index) {
  const model::ModelConfig& cfg = ckpt.config;
  std::vector<MotionSample> samples =
      window_samples(data, cfg.t_obs, cfg.t_pred, 1, cfg.n_points);
  LHMP_CHECK(sample_index >= 0 && sample_index < static_cast<int>(samples.size()),
             "predict: sample index ", sample_index, " out of range (", samples.size(),
             " samples)");
  const MotionSample& s = samples[sample_index];

  model::Network<float> net(cfg);
  auto input = to_sample_input<float>(s);
  ad::Graph<float> g;
  ad::ParamBinder<float> bind(g, ckpt.params, /*trainable=*/false);
  auto outs = net.forward_diverse(g, bind, input);

  Prediction pred;
  pred.sample_index = sample_index;
  pred.centroid = s.centroid;
  pred.gt_future_world = s.future_gt_world();
  for (const auto& fwd : outs) {
    std::vector<Pose> poses = net.future_poses(g, fwd);
    for (Pose& p : poses)
      for (Vec3& v : p) v += s.centroid;
    pred.hypotheses_world.push_back(std::move(poses));
  }
  return pred;
}

}  // namespace lhmp::harness
