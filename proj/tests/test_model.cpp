#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "lhmp/model/check_suite.hpp"
#include "lhmp/model/network.hpp"
#include "lhmp/pcops.hpp"
#include "lhmp/rng.hpp"

using namespace lhmp;
using ad::Graph;
using ad::ParamBinder;
using ad::ParamStore;
using ad::Var;
using model::ModelConfig;
using model::Network;
using model::SampleInput;

namespace {

template <class S>
SampleInput<S> random_sample(const ModelConfig& cfg, std::uint64_t seed) {
  Rng rng(derive_seed(seed, hash_str("model-test-sample")));
  SampleInput<S> in;
  for (int t = 0; t < cfg.t_obs; ++t) {
    model::FrameInput<S> fr;
    fr.points_xyz.resize(static_cast<size_t>(cfg.n_points) * 3);
    for (auto& v : fr.points_xyz) v = static_cast<S>(rng.uniform(-0.6, 0.6));
    std::vector<std::uint8_t> labels(cfg.n_points);
    for (auto& l : labels) l = static_cast<std::uint8_t>(rng.uniform_index(cfg.k_parts));
    fr.bins = pcops::bin_by_part(labels);
    in.observed.push_back(std::move(fr));
  }
  in.gt_joints.resize(static_cast<size_t>(cfg.t_total()) * kNumJoints * 3);
  for (auto& v : in.gt_joints) v = static_cast<S>(rng.uniform(-0.5, 0.5));
  in.gt_clouds.resize(cfg.t_total());
  for (auto& cloud : in.gt_clouds) {
    cloud.resize(12 * 3);
    for (auto& v : cloud) v = static_cast<S>(rng.uniform(-0.6, 0.6));
  }
  return in;
}

}  // namespace

TEST_CASE("encode_frame shapes and max-pool invariances") {
  ModelConfig cfg = model::micro_config();
  Network<double> net(cfg);
  auto params = net.init_params(3);
  auto in = random_sample<double>(cfg, 3);

  Graph<double> g;
  ParamBinder<double> bind(g, params);
  auto [pointwise, global] = net.encode_frame(g, bind, in.observed[0]);
  CHECK(g.rows(pointwise) == cfg.n_points);
  CHECK(g.cols(pointwise) == cfg.d1);
  CHECK(g.rows(global) == 1);
  CHECK(g.cols(global) == cfg.d1);

  // Permuting the points leaves the global feature unchanged.
  model::FrameInput<double> shuffled = in.observed[0];
  Rng rng(8);
  std::vector<int> perm(cfg.n_points);
  for (int i = 0; i < cfg.n_points; ++i) perm[i] = i;
  for (int i = cfg.n_points - 1; i > 0; --i)
    std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
  for (int i = 0; i < cfg.n_points; ++i)
    for (int c = 0; c < 3; ++c)
      shuffled.points_xyz[static_cast<size_t>(perm[i]) * 3 + c] =
          in.observed[0].points_xyz[static_cast<size_t>(i) * 3 + c];
  auto [pw2, global2] = net.encode_frame(g, bind, shuffled);
  auto a = g.value(global);
  auto b = g.value(global2);
  for (int c = 0; c < cfg.d1; ++c) CHECK(std::abs(a[c] - b[c]) <= 1e-6);

  // Duplicating every point leaves the max pool exactly unchanged.
  model::FrameInput<double> doubled = in.observed[0];
  doubled.points_xyz.insert(doubled.points_xyz.end(), in.observed[0].points_xyz.begin(),
                            in.observed[0].points_xyz.end());
  ModelConfig cfg2 = cfg;
  cfg2.n_points = cfg.n_points * 2;
  Network<double> net2(cfg2);
  Graph<double> g2;
  ParamBinder<double> bind2(g2, params);
  auto [pw3, global3] = net2.encode_frame(g2, bind2, doubled);
  auto c3 = g2.value(global3);
  for (int c = 0; c < cfg.d1; ++c) CHECK(c3[c] == a[c]);

  model::FrameInput<double> nan_frame = in.observed[0];
  nan_frame.points_xyz[0] = std::nan("");
  CHECK_THROWS_AS(net.encode_frame(g, bind, nan_frame), ContractError);
}

TEST_CASE("paper-preset encoder emits 256 x 1024 pointwise features") {
  ModelConfig cfg = ModelConfig::paper();
  Network<float> net(cfg);
  auto params = net.init_params(1);
  auto in = random_sample<float>(cfg, 1);
  Graph<float> g;
  ParamBinder<float> bind(g, params, /*trainable=*/false);
  auto [pointwise, global] = net.encode_frame(g, bind, in.observed[0]);
  CHECK(g.rows(pointwise) == 256);
  CHECK(g.cols(pointwise) == 1024);
  CHECK(g.cols(global) == 1024);
}

TEST_CASE("a singleton part bin's token equals that point's feature row") {
  ModelConfig cfg = model::micro_config();
  Network<double> net(cfg);
  auto params = net.init_params(5);
  auto in = random_sample<double>(cfg, 5);
  // Force part 4 to a single point (index 7).
  std::vector<std::uint8_t> labels(cfg.n_points, 0);
  labels[7] = 4;
  in.observed[0].bins = pcops::bin_by_part(labels);

  Graph<double> g;
  ParamBinder<double> bind(g, params);
  auto [pointwise, global] = net.encode_frame(g, bind, in.observed[0]);
  Var token = g.max_rows(g.gather_rows(pointwise, in.observed[0].bins.bins[4]));
  auto tok = g.value(token);
  auto all = g.value(pointwise);
  for (int c = 0; c < cfg.d1; ++c) CHECK(tok[c] == all[7 * cfg.d1 + c]);
}

TEST_CASE("descriptor shape and in-part shuffle invariance") {
  ModelConfig cfg = model::micro_config();
  Network<double> net(cfg);
  auto params = net.init_params(7);
  auto in = random_sample<double>(cfg, 7);

  Graph<double> g;
  ParamBinder<double> bind(g, params);
  Var h = net.build_descriptor(g, bind, in);
  CHECK(g.rows(h) == cfg.t_obs * (cfg.k_parts + 1));
  CHECK(g.cols(h) == cfg.d1);

  // Shuffling all points of frame 0 (with their labels) leaves H within 1e-6.
  auto shuffled = in;
  Rng rng(19);
  std::vector<int> perm(cfg.n_points);
  for (int i = 0; i < cfg.n_points; ++i) perm[i] = i;
  for (int i = cfg.n_points - 1; i > 0; --i)
    std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
  std::vector<std::uint8_t> old_labels(cfg.n_points), new_labels(cfg.n_points);
  for (int i = 0; i < cfg.n_points; ++i)
    for (int k = 0; k < cfg.k_parts; ++k)
      if (std::find(in.observed[0].bins.bins[k].begin(), in.observed[0].bins.bins[k].end(),
                    i) != in.observed[0].bins.bins[k].end())
        old_labels[i] = static_cast<std::uint8_t>(k);
  for (int i = 0; i < cfg.n_points; ++i) {
    new_labels[perm[i]] = old_labels[i];
    for (int c = 0; c < 3; ++c)
      shuffled.observed[0].points_xyz[static_cast<size_t>(perm[i]) * 3 + c] =
          in.observed[0].points_xyz[static_cast<size_t>(i) * 3 + c];
  }
  shuffled.observed[0].bins = pcops::bin_by_part(new_labels);

  Graph<double> g2;
  ParamBinder<double> bind2(g2, params);
  Var h2 = net.build_descriptor(g2, bind2, shuffled);
  auto a = g.value(h);
  auto b = g2.value(h2);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-6);
}

TEST_CASE("all-empty bins raise a degenerate-input error") {
  ModelConfig cfg = model::micro_config();
  Network<double> net(cfg);
  auto params = net.init_params(2);
  auto in = random_sample<double>(cfg, 2);
  for (auto& fr : in.observed) {
    std::vector<std::uint8_t> labels(cfg.n_points, kNoiseLabel);
    fr.bins = pcops::bin_by_part(labels);
  }
  Graph<double> g;
  ParamBinder<double> bind(g, params);
  CHECK_THROWS_AS(net.build_descriptor(g, bind, in), ContractError);
}

TEST_CASE("motion latent map shapes for short- and long-term settings") {
  for (int t_pred : {2, 5}) {
    ModelConfig cfg = model::micro_config();
    cfg.t_pred = t_pred;
    Network<double> net(cfg);
    auto params = net.init_params(4);
    auto in = random_sample<double>(cfg, 4);
    Graph<double> g;
    ParamBinder<double> bind(g, params);
    Var h = net.build_descriptor(g, bind, in);
    auto m = net.motion_latent_map(g, bind, h, 0);
    const int t = cfg.t_obs + t_pred;
    CHECK(g.rows(m.f) == t * (cfg.k_parts + 1));
    CHECK(g.cols(m.f) == cfg.d1);
    CHECK(g.rows(m.f_refined) == t * (cfg.k_parts + 1));
    CHECK(g.rows(m.coarse) == t * kNumJoints);
    CHECK(g.cols(m.coarse) == 3);
    CHECK_THROWS_AS(net.motion_latent_map(g, bind, h, cfg.m_hypotheses), ContractError);
  }
}

TEST_CASE("hypothesis banks produce distinct mappings at init") {
  ModelConfig cfg = model::micro_config();
  cfg.m_hypotheses = 4;
  Network<double> net(cfg);
  auto params = net.init_params(6);
  auto in = random_sample<double>(cfg, 6);
  Graph<double> g;
  ParamBinder<double> bind(g, params);
  Var h = net.build_descriptor(g, bind, in);
  auto m0 = net.motion_latent_map(g, bind, h, 0);
  auto m1 = net.motion_latent_map(g, bind, h, 1);
  auto a = g.value(m0.f_refined);
  auto b = g.value(m1.f_refined);
  double max_delta = 0;
  for (size_t i = 0; i < a.size(); ++i) max_delta = std::max(max_delta, std::abs(a[i] - b[i]));
  CHECK(max_delta > 1e-3);
}

TEST_CASE("stcr grid has K+25 tokens per frame and zeroed projections pass through") {
  ModelConfig cfg = model::micro_config();
  Network<double> net(cfg);
  auto params = net.init_params(9);
  // Zero every attention output projection and second FFN layer in the stcr
  // stack: the ST/TT blocks must reduce to the identity.
  for (int i = 0; i < params.count(); ++i) {
    auto& e = params.entry(i);
    if (e.name.rfind("stcr.pair", 0) == 0 &&
        (e.name.find(".attn.o.") != std::string::npos ||
         e.name.find(".ffn.2.") != std::string::npos))
      std::fill(e.value.begin(), e.value.end(), 0.0);
  }
  auto in = random_sample<double>(cfg, 9);
  Graph<double> g;
  ParamBinder<double> bind(g, params);
  Var h = net.build_descriptor(g, bind, in);
  auto m = net.motion_latent_map(g, bind, h, 0);
  Var tokens = net.stcr_refine(g, bind, m.coarse, m.f_refined);

  const int t = cfg.t_total();
  const int tok = cfg.k_parts + 25;
  CHECK(tok == 34);
  CHECK(g.rows(tokens) == t * tok);
  CHECK(g.cols(tokens) == cfg.d2);

  // Rebuild the embedded grid directly and compare.
  Var e_joint = g.add(g.matmul(m.coarse, bind("stcr.embed_joint.w")),
                      bind("stcr.embed_joint.b"));
  Var e_feat = g.add(g.matmul(m.f_refined, bind("stcr.embed_feat.w")),
                     bind("stcr.embed_feat.b"));
  std::vector<Var> frames;
  for (int ti = 0; ti < t; ++ti) {
    std::array<Var, 2> parts = {g.slice_rows(e_joint, ti * kNumJoints, kNumJoints),
                                g.slice_rows(e_feat, ti * (cfg.k_parts + 1), cfg.k_parts + 1)};
    frames.push_back(g.concat_rows(parts));
  }
  Var grid = g.concat_rows(frames);
  auto got = g.value(tokens);
  auto want = g.value(grid);
  REQUIRE(got.size() == want.size());
  for (size_t i = 0; i < got.size(); ++i) CHECK(got[i] == want[i]);
}

TEST_CASE("decode heads emit 24x3 joints and Kx32x3 points, frame-stateless") {
  ModelConfig cfg = model::micro_config();
  Network<double> net(cfg);
  auto params = net.init_params(12);
  auto in = random_sample<double>(cfg, 12);
  Graph<double> g;
  ParamBinder<double> bind(g, params);
  auto fwd = net.forward(g, bind, in, 0);
  const int t = cfg.t_total();
  CHECK(g.rows(fwd.final_joints) == t * kNumJoints);
  CHECK(g.cols(fwd.final_joints) == 3);
  CHECK(g.rows(fwd.pred_points) == t * cfg.k_parts * 32);
  CHECK(g.cols(fwd.pred_points) == 3);

  // Identical tokens at two frames decode identically (shared weights).
  Rng rng(2);
  std::vector<double> one_frame(static_cast<size_t>(cfg.k_parts + 25) * cfg.d2);
  for (auto& v : one_frame) v = rng.uniform(-1, 1);
  std::vector<double> two_frames = one_frame;
  two_frames.insert(two_frames.end(), one_frame.begin(), one_frame.end());
  ModelConfig cfg2 = cfg;
  cfg2.t_obs = 1;
  cfg2.t_pred = 1;
  Network<double> net2(cfg2);  // t_total == 2 frames
  Graph<double> g2;
  ParamBinder<double> bind2(g2, params);
  Var tokens = g2.constant({2 * (cfg.k_parts + 25), cfg.d2}, two_frames);
  auto heads = net2.decode_heads(g2, bind2, tokens);
  auto jv = g2.value(heads.joints);
  auto pv = g2.value(heads.points);
  for (int i = 0; i < kNumJoints * 3; ++i) CHECK(jv[i] == jv[kNumJoints * 3 + i]);
  const int ppf = cfg.k_parts * 32 * 3;
  for (int i = 0; i < ppf; ++i) CHECK(pv[i] == pv[ppf + i]);
}

TEST_CASE("joint losses match naive loops and the exact cases") {
  ModelConfig cfg = model::micro_config();
  Network<double> net(cfg);
  auto params = net.init_params(21);
  auto in = random_sample<double>(cfg, 21);
  Graph<double> g;
  ParamBinder<double> bind(g, params);
  auto fwd = net.forward(g, bind, in, 0);

  // gt == prediction -> zero initial loss
  auto exact = in;
  auto coarse_vals = g.value(fwd.coarse_joints);
  exact.gt_joints.assign(coarse_vals.begin(), coarse_vals.end());
  Graph<double> g2;
  ParamBinder<double> bind2(g2, params);
  auto fwd2 = net.forward(g2, bind2, exact, 0);
  auto losses2 = net.build_losses(g2, fwd2, exact);
  CHECK(g2.value(losses2.initial)[0] == 0.0);

  // naive loop oracle on the random gt
  auto losses = net.build_losses(g, fwd, in);
  double naive_init = 0.0, naive_final = 0.0;
  auto final_vals = g.value(fwd.final_joints);
  for (size_t i = 0; i < in.gt_joints.size(); ++i) {
    double di = coarse_vals[i] - in.gt_joints[i];
    double df = final_vals[i] - in.gt_joints[i];
    naive_init += di * di;
    naive_final += df * df;
  }
  CHECK(std::abs(g.value(losses.initial)[0] - naive_init) <= 1e-9);
  CHECK(std::abs(g.value(losses.final_)[0] - naive_final) <= 1e-9);

  // chamfer term matches the pcops oracle summed over frames
  double naive_cd = 0.0;
  auto pred_pts = g.value(fwd.pred_points);
  const int ppf = cfg.k_parts * 32;
  for (int t = 0; t < cfg.t_total(); ++t) {
    std::vector<Vec3> pred_cloud, gt_cloud;
    for (int i = 0; i < ppf; ++i) {
      const double* p = pred_pts.data() + (static_cast<size_t>(t) * ppf + i) * 3;
      pred_cloud.push_back(Vec3{p[0], p[1], p[2]});
    }
    for (size_t i = 0; i < in.gt_clouds[t].size() / 3; ++i) {
      const double* p = in.gt_clouds[t].data() + i * 3;
      gt_cloud.push_back(Vec3{p[0], p[1], p[2]});
    }
    naive_cd += pcops::chamfer(pred_cloud, gt_cloud);
  }
  CHECK(std::abs(g.value(losses.points)[0] - naive_cd) <= 1e-9);

  // total = sum of parts
  CHECK(g.value(losses.total)[0] ==
        doctest::Approx(g.value(losses.initial)[0] + g.value(losses.final_)[0] +
                        g.value(losses.points)[0])
            .epsilon(1e-12));

  // single unit offset on one joint -> loss 1
  auto one = exact;
  one.gt_joints[5 * 3] += 1.0;  // x of one joint in one frame
  Graph<double> g3;
  ParamBinder<double> bind3(g3, params);
  auto fwd3 = net.forward(g3, bind3, one, 0);
  auto losses3 = net.build_losses(g3, fwd3, one);
  CHECK(g3.value(losses3.initial)[0] == doctest::Approx(1.0).epsilon(1e-9));

  // empty gt cloud frames are skipped with a counter
  auto sparse = in;
  sparse.gt_clouds[1].clear();
  Graph<double> g4;
  ParamBinder<double> bind4(g4, params);
  auto fwd4 = net.forward(g4, bind4, sparse, 0);
  auto losses4 = net.build_losses(g4, fwd4, sparse);
  CHECK(losses4.skipped_cloud_frames == 1);

  // missing future gt is a contract error
  auto truncated = in;
  truncated.gt_joints.resize(static_cast<size_t>(cfg.t_obs) * kNumJoints * 3);
  CHECK_THROWS_AS(net.build_losses(g, fwd, truncated), ContractError);
}

TEST_CASE("backward of the total equals the sum of component backwards") {
  ModelConfig cfg = model::micro_config();
  Network<double> net(cfg);
  auto params = net.init_params(31);
  auto in = random_sample<double>(cfg, 31);

  auto grads_for = [&](int which) {  // 0: total, 1: initial, 2: final, 3: points
    Graph<double> g;
    ParamBinder<double> bind(g, params);
    auto fwd = net.forward(g, bind, in, 0);
    auto losses = net.build_losses(g, fwd, in);
    Var target = which == 0   ? losses.total
                 : which == 1 ? losses.initial
                 : which == 2 ? losses.final_
                              : losses.points;
    g.backward(target);
    auto grads = params.make_grad_buffers();
    bind.collect_grads(grads);
    return grads;
  };
  auto total = grads_for(0);
  auto gi = grads_for(1);
  auto gf = grads_for(2);
  auto gp = grads_for(3);
  for (size_t p = 0; p < total.size(); ++p)
    for (size_t j = 0; j < total[p].size(); ++j) {
      double sum = gi[p][j] + gf[p][j] + gp[p][j];
      double denom = std::max({std::abs(total[p][j]), std::abs(sum), 1.0});
      CHECK(std::abs(total[p][j] - sum) / denom <= 1e-6);
    }
}

TEST_CASE("forward is bit-deterministic") {
  ModelConfig cfg = model::micro_config();
  Network<float> net(cfg);
  auto params = net.init_params(40);
  auto in = random_sample<float>(cfg, 40);
  auto run = [&]() {
    Graph<float> g;
    ParamBinder<float> bind(g, params);
    auto fwd = net.forward(g, bind, in, 0);
    auto v = g.value(fwd.final_joints);
    return std::vector<float>(v.begin(), v.end());
  };
  auto a = run();
  auto b = run();
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0);
}

TEST_CASE("forward_diverse shares the descriptor and differs downstream") {
  ModelConfig cfg = model::micro_config();
  cfg.m_hypotheses = 4;
  Network<double> net(cfg);
  auto params = net.init_params(44);
  auto in = random_sample<double>(cfg, 44);
  Graph<double> g;
  ParamBinder<double> bind(g, params);
  auto outs = net.forward_diverse(g, bind, in);
  REQUIRE(outs.size() == 4);
  for (int m = 1; m < 4; ++m) CHECK(outs[m].descriptor.id == outs[0].descriptor.id);

  for (int m = 1; m < 4; ++m) {
    auto a = g.value(outs[0].final_joints);
    auto b = g.value(outs[m].final_joints);
    double max_delta = 0;
    for (size_t i = 0; i < a.size(); ++i)
      max_delta = std::max(max_delta, std::abs(a[i] - b[i]));
    CHECK(max_delta > 0.0);
  }
}

TEST_CASE("forward_diverse with M=1 equals the plain forward") {
  ModelConfig cfg = model::micro_config();
  Network<float> net(cfg);
  auto params = net.init_params(50);
  auto in = random_sample<float>(cfg, 50);
  Graph<float> g1, g2;
  ParamBinder<float> b1(g1, params), b2(g2, params);
  auto fwd = net.forward(g1, b1, in, 0);
  auto outs = net.forward_diverse(g2, b2, in);
  auto a = g1.value(fwd.final_joints);
  auto b = g2.value(outs[0].final_joints);
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0);
}

TEST_CASE("wta selects the min-MPJPE hypothesis, consistent with pcops") {
  ModelConfig cfg = model::micro_config();
  cfg.m_hypotheses = 4;
  Network<double> net(cfg);
  auto params = net.init_params(60);
  auto in = random_sample<double>(cfg, 60);
  Graph<double> g;
  ParamBinder<double> bind(g, params);
  auto wta = net.wta_loss(g, bind, in);

  // Cross-check with pcops::min_mpjpe on the same outputs.
  std::vector<int> horizon(cfg.t_pred);
  for (int i = 0; i < cfg.t_pred; ++i) horizon[i] = i;
  std::vector<Pose> gt(cfg.t_pred);
  for (int t = 0; t < cfg.t_pred; ++t)
    for (int j = 0; j < kNumJoints; ++j) {
      size_t o = (static_cast<size_t>(cfg.t_obs + t) * kNumJoints + j) * 3;
      gt[t][j] = Vec3{in.gt_joints[o], in.gt_joints[o + 1], in.gt_joints[o + 2]};
    }
  std::vector<std::vector<Pose>> hyps;
  for (const auto& out : wta.outputs) hyps.push_back(net.future_poses(g, out));
  auto ref = pcops::min_mpjpe(hyps, gt, horizon);
  CHECK(wta.winner == ref.argmin);
}

TEST_CASE("wta with an exact-match hypothesis zeroes the winner's final term") {
  ModelConfig cfg = model::micro_config();
  cfg.m_hypotheses = 3;
  Network<double> net(cfg);
  auto params = net.init_params(61);
  auto in = random_sample<double>(cfg, 61);

  // Make hypothesis 1's final joints the ground truth.
  Graph<double> g0;
  ParamBinder<double> b0(g0, params);
  auto outs = net.forward_diverse(g0, b0, in);
  auto v = g0.value(outs[1].final_joints);
  in.gt_joints.assign(v.begin(), v.end());

  Graph<double> g;
  ParamBinder<double> bind(g, params);
  auto wta = net.wta_loss(g, bind, in);
  CHECK(wta.winner == 1);
  CHECK(g.value(wta.loss.final_)[0] == 0.0);
}

TEST_CASE("wta with M=1 equals loss_total") {
  ModelConfig cfg = model::micro_config();
  Network<double> net(cfg);
  auto params = net.init_params(62);
  auto in = random_sample<double>(cfg, 62);
  Graph<double> g1, g2;
  ParamBinder<double> b1(g1, params), b2(g2, params);
  auto fwd = net.forward(g1, b1, in, 0);
  auto plain = net.build_losses(g1, fwd, in);
  auto wta = net.wta_loss(g2, b2, in);
  CHECK(wta.winner == 0);
  CHECK(g1.value(plain.total)[0] == g2.value(wta.loss.total)[0]);
}

TEST_CASE("wta backward leaves losing query banks untouched") {
  ModelConfig cfg = model::micro_config();
  cfg.m_hypotheses = 3;
  Network<double> net(cfg);
  auto params = net.init_params(63);
  auto in = random_sample<double>(cfg, 63);
  Graph<double> g;
  ParamBinder<double> bind(g, params);
  auto wta = net.wta_loss(g, bind, in);
  g.backward(wta.loss.total);
  auto grads = params.make_grad_buffers();
  bind.collect_grads(grads);

  double winner_norm = 0.0;
  for (int m = 0; m < 3; ++m) {
    int idx = params.find("query_bank." + std::to_string(m));
    double norm = 0.0;
    for (double v : grads[idx]) norm += v * v;
    if (m == wta.winner) {
      winner_norm = norm;
    } else {
      CHECK(norm == 0.0);
    }
  }
  CHECK(winner_norm > 0.0);
}

TEST_CASE("micro model end-to-end gradcheck (sampled coordinates)") {
  auto line = model::model_gradcheck(11, 24);
  CAPTURE(line.max_rel_err);
  CHECK(line.max_rel_err <= 1e-4);
}
