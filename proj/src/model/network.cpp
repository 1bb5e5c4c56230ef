#include "lhmp/model/network.hpp"

#include <cmath>
#include <limits>
#include <string_view>

#include "lhmp/rng.hpp"

namespace lhmp::model {

using ad::Graph;
using ad::ParamBinder;
using ad::ParamStore;
using ad::Var;

namespace {

template <class S>
void add_tensor(ParamStore<S>& store, const std::string& name, std::vector<int> dims,
                std::uint64_t seed, const char* init) {
  size_t n = 1;
  for (int d : dims) n *= static_cast<size_t>(d);
  std::vector<S> v(n, S(0));
  Rng rng(derive_seed(seed, hash_str("param-init"), hash_str(name.c_str())));
  if (std::string_view(init) == "xavier") {
    double limit = std::sqrt(6.0 / (dims.front() + dims.back()));
    for (auto& x : v) x = static_cast<S>(rng.uniform(-limit, limit));
  } else if (std::string_view(init) == "normal02") {
    for (auto& x : v) x = static_cast<S>(rng.normal(0.0, 0.02));
  } else if (std::string_view(init) == "ones") {
    for (auto& x : v) x = S(1);
  }  // "zeros" keeps the fill
  store.add(name, std::move(dims), std::move(v));
}

template <class S>
void add_linear(ParamStore<S>& store, const std::string& prefix, int in, int out,
                std::uint64_t seed) {
  add_tensor(store, prefix + ".w", {in, out}, seed, "xavier");
  add_tensor(store, prefix + ".b", {1, out}, seed, "zeros");
}

template <class S>
void add_transformer_layer(ParamStore<S>& store, const std::string& prefix, int d,
                           std::uint64_t seed) {
  add_tensor(store, prefix + ".ln1.g", {1, d}, seed, "ones");
  add_tensor(store, prefix + ".ln1.b", {1, d}, seed, "zeros");
  add_tensor(store, prefix + ".attn.wq", {d, d}, seed, "xavier");
  add_tensor(store, prefix + ".attn.wk", {d, d}, seed, "xavier");
  add_tensor(store, prefix + ".attn.wv", {d, d}, seed, "xavier");
  add_linear(store, prefix + ".attn.o", d, d, seed);
  add_tensor(store, prefix + ".ln2.g", {1, d}, seed, "ones");
  add_tensor(store, prefix + ".ln2.b", {1, d}, seed, "zeros");
  add_linear(store, prefix + ".ffn.1", d, 2 * d, seed);
  add_linear(store, prefix + ".ffn.2", 2 * d, d, seed);
}

}  // namespace

template <class S>
ad::TransformerLayerParams<S> Network<S>::bind_layer(ParamBinder<S>& bind,
                                                     const std::string& prefix) const {
  ad::TransformerLayerParams<S> p;
  p.ln1_gain = bind(prefix + ".ln1.g");
  p.ln1_bias = bind(prefix + ".ln1.b");
  p.attn.wq = bind(prefix + ".attn.wq");
  p.attn.wk = bind(prefix + ".attn.wk");
  p.attn.wv = bind(prefix + ".attn.wv");
  p.attn.wo = bind(prefix + ".attn.o.w");
  p.attn.bo = bind(prefix + ".attn.o.b");
  p.ln2_gain = bind(prefix + ".ln2.g");
  p.ln2_bias = bind(prefix + ".ln2.b");
  p.ffn_w1 = bind(prefix + ".ffn.1.w");
  p.ffn_b1 = bind(prefix + ".ffn.1.b");
  p.ffn_w2 = bind(prefix + ".ffn.2.w");
  p.ffn_b2 = bind(prefix + ".ffn.2.b");
  return p;
}

template <class S>
ParamStore<S> Network<S>::init_params(std::uint64_t seed) const {
  ParamStore<S> store;
  const int k1 = cfg_.frame_tokens();
  const int t = cfg_.t_total();

  int in = 3;
  for (size_t l = 0; l < cfg_.pointnet_widths.size(); ++l) {
    add_linear(store, "pointnet." + std::to_string(l), in, cfg_.pointnet_widths[l], seed);
    in = cfg_.pointnet_widths[l];
  }

  add_transformer_layer(store, "desc.st", cfg_.d1, seed);
  add_transformer_layer(store, "desc.tt", cfg_.d1, seed);

  for (int m = 0; m < cfg_.m_hypotheses; ++m)
    add_tensor(store, "query_bank." + std::to_string(m), {t * k1, cfg_.d1}, seed,
               "normal02");

  add_tensor(store, "amlm.attn.wq", {cfg_.d1, cfg_.d1}, seed, "xavier");
  add_tensor(store, "amlm.attn.wk", {cfg_.d1, cfg_.d1}, seed, "xavier");
  add_tensor(store, "amlm.attn.wv", {cfg_.d1, cfg_.d1}, seed, "xavier");
  add_linear(store, "amlm.attn.o", cfg_.d1, cfg_.d1, seed);
  for (int i = 0; i < cfg_.n_st_pairs; ++i) {
    add_transformer_layer(store, "amlm.pair" + std::to_string(i) + ".st", cfg_.d1, seed);
    add_transformer_layer(store, "amlm.pair" + std::to_string(i) + ".tt", cfg_.d1, seed);
  }
  add_linear(store, "coarse", k1 * cfg_.d1, kNumJoints * 3, seed);

  add_linear(store, "stcr.embed_joint", 3, cfg_.d2, seed);
  add_linear(store, "stcr.embed_feat", cfg_.d1, cfg_.d2, seed);
  add_tensor(store, "stcr.pe_spatial", {cfg_.stcr_tokens(), cfg_.d2}, seed, "normal02");
  add_tensor(store, "stcr.pe_temporal", {t, cfg_.d2}, seed, "normal02");
  for (int i = 0; i < cfg_.n_st_pairs; ++i) {
    add_transformer_layer(store, "stcr.pair" + std::to_string(i) + ".st", cfg_.d2, seed);
    add_transformer_layer(store, "stcr.pair" + std::to_string(i) + ".tt", cfg_.d2, seed);
  }

  add_linear(store, "head_joint.1", cfg_.d2, cfg_.d2, seed);
  add_linear(store, "head_joint.2", cfg_.d2, cfg_.d2, seed);
  add_linear(store, "head_joint.3", cfg_.d2, 3, seed);
  add_linear(store, "head_point.1", cfg_.d2, cfg_.d2, seed);
  add_linear(store, "head_point.2", cfg_.d2, cfg_.d2, seed);
  add_linear(store, "head_point.3", cfg_.d2, 32 * 3, seed);
  return store;
}

template <class S>
std::pair<Var, Var> Network<S>::encode_frame(Graph<S>& g, ParamBinder<S>& bind,
                                             const FrameInput<S>& frame) const {
  LHMP_CHECK(static_cast<int>(frame.points_xyz.size()) == cfg_.n_points * 3,
             "encode_frame: expected ", cfg_.n_points, " points");
  for (S v : frame.points_xyz)
    LHMP_CHECK(std::isfinite(static_cast<double>(v)), "encode_frame: non-finite input");

  Var h = g.constant({cfg_.n_points, 3}, frame.points_xyz);
  const int n_layers = static_cast<int>(cfg_.pointnet_widths.size());
  for (int l = 0; l < n_layers; ++l) {
    std::string p = "pointnet." + std::to_string(l);
    h = g.add(g.matmul(h, bind(p + ".w")), bind(p + ".b"));
    if (l + 1 < n_layers) h = g.relu(h);
  }
  Var global = g.max_rows(h);
  return {h, global};
}

template <class S>
Var Network<S>::build_descriptor(Graph<S>& g, ParamBinder<S>& bind,
                                 const SampleInput<S>& in) const {
  LHMP_CHECK(static_cast<int>(in.observed.size()) == cfg_.t_obs,
             "build_descriptor: expected ", cfg_.t_obs, " observed frames");
  const int k1 = cfg_.frame_tokens();

  bool any_part = false;
  std::vector<Var> frames;
  frames.reserve(cfg_.t_obs);
  for (const FrameInput<S>& fr : in.observed) {
    auto [pointwise, global] = encode_frame(g, bind, fr);
    std::vector<Var> tokens;
    tokens.reserve(k1);
    tokens.push_back(global);
    for (int k = 0; k < cfg_.k_parts; ++k) {
      if (fr.bins.nonempty[k]) {
        any_part = true;
        tokens.push_back(g.max_rows(g.gather_rows(pointwise, fr.bins.bins[k])));
      } else {
        // Empty bin: all-zeros token, per the presence mask.
        tokens.push_back(g.zeros_const({1, cfg_.d1}));
      }
    }
    frames.push_back(g.concat_rows(tokens));
  }
  LHMP_CHECK(any_part, "build_descriptor: every part bin empty in every frame");

  Var grid = g.concat_rows(frames);
  grid = run_spatial(g, grid, cfg_.t_obs, k1, cfg_.heads, bind_layer(bind, "desc.st"));
  grid = run_temporal(g, grid, cfg_.t_obs, k1, cfg_.heads, bind_layer(bind, "desc.tt"));
  return grid;
}

namespace {

// Attention block with an optional positional encoding added to the queries
// and keys only; the residual stream stays untouched, so zeroed output
// projections reduce the block to the identity.
template <class S>
Var pe_block(Graph<S>& g, Var x, Var pe, int heads,
             const ad::TransformerLayerParams<S>& p) {
  if (!pe.valid()) return ad::transformer_layer(g, x, heads, p);
  Var normed = g.layer_norm(x, p.ln1_gain, p.ln1_bias);
  Var qk = g.add(normed, pe);
  Var attended = ad::multi_head_attention(g, qk, qk, normed, heads, p.attn);
  Var x1 = g.add(x, attended);
  Var normed2 = g.layer_norm(x1, p.ln2_gain, p.ln2_bias);
  Var hidden = g.relu(g.add(g.matmul(normed2, p.ffn_w1), p.ffn_b1));
  Var ffn = g.add(g.matmul(hidden, p.ffn_w2), p.ffn_b2);
  return g.add(x1, ffn);
}

}  // namespace

template <class S>
Var Network<S>::run_spatial(Graph<S>& g, Var grid, int n_frames, int tokens_per_frame,
                            int heads, const ad::TransformerLayerParams<S>& p,
                            Var pe) const {
  std::vector<Var> out;
  out.reserve(n_frames);
  for (int t = 0; t < n_frames; ++t) {
    Var x = g.slice_rows(grid, t * tokens_per_frame, tokens_per_frame);
    out.push_back(pe_block(g, x, pe, heads, p));
  }
  return g.concat_rows(out);
}

template <class S>
Var Network<S>::run_temporal(Graph<S>& g, Var grid, int n_frames, int tokens_per_frame,
                             int heads, const ad::TransformerLayerParams<S>& p,
                             Var pe) const {
  // Token-major pass over the frame axis, then a permutation gather puts the
  // rows back in frame-major order.
  std::vector<Var> out;
  out.reserve(tokens_per_frame);
  for (int j = 0; j < tokens_per_frame; ++j) {
    std::vector<int> idx(n_frames);
    for (int t = 0; t < n_frames; ++t) idx[t] = t * tokens_per_frame + j;
    Var x = g.gather_rows(grid, std::move(idx));
    out.push_back(pe_block(g, x, pe, heads, p));
  }
  Var token_major = g.concat_rows(out);
  std::vector<int> perm(static_cast<size_t>(n_frames) * tokens_per_frame);
  for (int t = 0; t < n_frames; ++t)
    for (int j = 0; j < tokens_per_frame; ++j)
      perm[static_cast<size_t>(t) * tokens_per_frame + j] = j * n_frames + t;
  return g.gather_rows(token_major, std::move(perm));
}

template <class S>
typename Network<S>::Mapped Network<S>::motion_latent_map(Graph<S>& g,
                                                          ParamBinder<S>& bind,
                                                          Var descriptor,
                                                          int hypothesis) const {
  LHMP_CHECK(hypothesis >= 0 && hypothesis < cfg_.m_hypotheses,
             "motion_latent_map: hypothesis ", hypothesis, " out of range");
  const int k1 = cfg_.frame_tokens();
  const int t = cfg_.t_total();

  Var queries = bind("query_bank." + std::to_string(hypothesis));
  ad::AttentionParams<S> attn;
  attn.wq = bind("amlm.attn.wq");
  attn.wk = bind("amlm.attn.wk");
  attn.wv = bind("amlm.attn.wv");
  attn.wo = bind("amlm.attn.o.w");
  attn.bo = bind("amlm.attn.o.b");
  Var f = ad::multi_head_attention(g, queries, descriptor, descriptor, cfg_.heads, attn);

  Var grid = f;
  for (int i = 0; i < cfg_.n_st_pairs; ++i) {
    std::string prefix = "amlm.pair" + std::to_string(i);
    grid = run_spatial(g, grid, t, k1, cfg_.heads, bind_layer(bind, prefix + ".st"));
    grid = run_temporal(g, grid, t, k1, cfg_.heads, bind_layer(bind, prefix + ".tt"));
  }

  // Coarse joints: each frame's flattened token block through one linear map.
  std::vector<Var> per_frame;
  per_frame.reserve(t);
  Var cw = bind("coarse.w");
  Var cb = bind("coarse.b");
  for (int ti = 0; ti < t; ++ti) {
    Var block = g.reshape(g.slice_rows(grid, ti * k1, k1), {1, k1 * cfg_.d1});
    per_frame.push_back(g.add(g.matmul(block, cw), cb));
  }
  Var coarse = g.reshape(g.concat_rows(per_frame), {t * kNumJoints, 3});
  return {f, grid, coarse};
}

template <class S>
Var Network<S>::stcr_refine(Graph<S>& g, ParamBinder<S>& bind, Var coarse,
                            Var f_refined) const {
  const int t = cfg_.t_total();
  const int k1 = cfg_.frame_tokens();
  const int tok = cfg_.stcr_tokens();

  Var e_joint = g.add(g.matmul(coarse, bind("stcr.embed_joint.w")),
                      bind("stcr.embed_joint.b"));
  Var e_feat = g.add(g.matmul(f_refined, bind("stcr.embed_feat.w")),
                     bind("stcr.embed_feat.b"));

  std::vector<Var> frames;
  frames.reserve(t);
  for (int ti = 0; ti < t; ++ti) {
    std::array<Var, 2> parts = {g.slice_rows(e_joint, ti * kNumJoints, kNumJoints),
                                g.slice_rows(e_feat, ti * k1, k1)};
    frames.push_back(g.concat_rows(parts));
  }
  Var grid = g.concat_rows(frames);

  Var pe_s = bind("stcr.pe_spatial");
  Var pe_t = bind("stcr.pe_temporal");
  for (int i = 0; i < cfg_.n_st_pairs; ++i) {
    std::string prefix = "stcr.pair" + std::to_string(i);
    grid = run_spatial(g, grid, t, tok, cfg_.heads, bind_layer(bind, prefix + ".st"), pe_s);
    grid = run_temporal(g, grid, t, tok, cfg_.heads, bind_layer(bind, prefix + ".tt"), pe_t);
  }
  return grid;
}

template <class S>
typename Network<S>::Heads Network<S>::decode_heads(Graph<S>& g, ParamBinder<S>& bind,
                                                    Var tokens) const {
  const int t = cfg_.t_total();
  const int tok = cfg_.stcr_tokens();

  auto mlp3 = [&](Var x, const std::string& prefix) {
    x = g.relu(g.add(g.matmul(x, bind(prefix + ".1.w")), bind(prefix + ".1.b")));
    x = g.relu(g.add(g.matmul(x, bind(prefix + ".2.w")), bind(prefix + ".2.b")));
    return g.add(g.matmul(x, bind(prefix + ".3.w")), bind(prefix + ".3.b"));
  };

  std::vector<int> joint_idx;
  joint_idx.reserve(static_cast<size_t>(t) * kNumJoints);
  for (int ti = 0; ti < t; ++ti)
    for (int j = 0; j < kNumJoints; ++j) joint_idx.push_back(ti * tok + j);
  Var joints = mlp3(g.gather_rows(tokens, std::move(joint_idx)), "head_joint");

  // The K local-semantic tokens sit after the 24 joint tokens and the global
  // feature token inside each frame block.
  std::vector<int> part_idx;
  part_idx.reserve(static_cast<size_t>(t) * cfg_.k_parts);
  for (int ti = 0; ti < t; ++ti)
    for (int k = 0; k < cfg_.k_parts; ++k) part_idx.push_back(ti * tok + kNumJoints + 1 + k);
  Var points = mlp3(g.gather_rows(tokens, std::move(part_idx)), "head_point");
  points = g.reshape(points, {t * cfg_.k_parts * 32, 3});
  return {joints, points};
}

template <class S>
ForwardNodes Network<S>::forward(Graph<S>& g, ParamBinder<S>& bind,
                                 const SampleInput<S>& in, int hypothesis) const {
  ForwardNodes out;
  out.descriptor = build_descriptor(g, bind, in);
  Mapped m = motion_latent_map(g, bind, out.descriptor, hypothesis);
  out.mapped = m.f;
  out.refined = m.f_refined;
  out.coarse_joints = m.coarse;
  out.tokens = stcr_refine(g, bind, m.coarse, m.f_refined);
  Heads heads = decode_heads(g, bind, out.tokens);
  out.final_joints = heads.joints;
  out.pred_points = heads.points;
  return out;
}

template <class S>
std::vector<ForwardNodes> Network<S>::forward_diverse(Graph<S>& g, ParamBinder<S>& bind,
                                                      const SampleInput<S>& in) const {
  Var descriptor = build_descriptor(g, bind, in);
  std::vector<ForwardNodes> outs;
  outs.reserve(cfg_.m_hypotheses);
  for (int m = 0; m < cfg_.m_hypotheses; ++m) {
    ForwardNodes fwd;
    fwd.descriptor = descriptor;
    Mapped mapped = motion_latent_map(g, bind, descriptor, m);
    fwd.mapped = mapped.f;
    fwd.refined = mapped.f_refined;
    fwd.coarse_joints = mapped.coarse;
    fwd.tokens = stcr_refine(g, bind, mapped.coarse, mapped.f_refined);
    Heads heads = decode_heads(g, bind, fwd.tokens);
    fwd.final_joints = heads.joints;
    fwd.pred_points = heads.points;
    outs.push_back(fwd);
  }
  return outs;
}

template <class S>
LossNodes Network<S>::build_losses(Graph<S>& g, const ForwardNodes& fwd,
                                   const SampleInput<S>& in) const {
  const int t = cfg_.t_total();
  LHMP_CHECK(static_cast<int>(in.gt_joints.size()) == t * kNumJoints * 3,
             "build_losses: ground-truth joints must cover all ", t, " frames");
  LHMP_CHECK(static_cast<int>(in.gt_clouds.size()) == t,
             "build_losses: need one ground-truth cloud slot per frame");

  LossNodes out;
  Var gt = g.constant({t * kNumJoints, 3}, in.gt_joints);
  out.initial = g.sse(fwd.coarse_joints, gt);
  out.final_ = g.sse(fwd.final_joints, gt);

  const int pts_per_frame = cfg_.k_parts * 32;
  Var cd;
  for (int ti = 0; ti < t; ++ti) {
    if (in.gt_clouds[ti].empty()) {
      out.skipped_cloud_frames += 1;
      continue;
    }
    Var pred_t = g.slice_rows(fwd.pred_points, ti * pts_per_frame, pts_per_frame);
    Var term = g.chamfer_vs(pred_t, in.gt_clouds[ti]);
    cd = cd.valid() ? g.add(cd, term) : term;
  }
  if (!cd.valid()) cd = g.zeros_const({1});
  out.points = cd;
  out.total = g.add(g.add(out.initial, out.final_), out.points);
  return out;
}

template <class S>
std::vector<Pose> Network<S>::future_poses(const Graph<S>& g,
                                           const ForwardNodes& fwd) const {
  auto vals = g.value(fwd.final_joints);
  std::vector<Pose> out(cfg_.t_pred);
  for (int ti = 0; ti < cfg_.t_pred; ++ti) {
    const S* frame = vals.data() + static_cast<size_t>(cfg_.t_obs + ti) * kNumJoints * 3;
    for (int j = 0; j < kNumJoints; ++j)
      out[ti][j] = Vec3{static_cast<double>(frame[j * 3 + 0]),
                        static_cast<double>(frame[j * 3 + 1]),
                        static_cast<double>(frame[j * 3 + 2])};
  }
  return out;
}

template <class S>
typename Network<S>::WtaResult Network<S>::wta_loss(Graph<S>& g, ParamBinder<S>& bind,
                                                    const SampleInput<S>& in) const {
  WtaResult r;
  r.outputs = forward_diverse(g, bind, in);

  const int t = cfg_.t_total();
  // Mean MPJPE over the prediction horizon, computed on values only.
  double best = std::numeric_limits<double>::infinity();
  for (int m = 0; m < cfg_.m_hypotheses; ++m) {
    auto vals = g.value(r.outputs[m].final_joints);
    double err = 0.0;
    for (int ti = cfg_.t_obs; ti < t; ++ti) {
      double frame_err = 0.0;
      for (int j = 0; j < kNumJoints; ++j) {
        size_t o = (static_cast<size_t>(ti) * kNumJoints + j) * 3;
        double dx = static_cast<double>(vals[o]) - static_cast<double>(in.gt_joints[o]);
        double dy =
            static_cast<double>(vals[o + 1]) - static_cast<double>(in.gt_joints[o + 1]);
        double dz =
            static_cast<double>(vals[o + 2]) - static_cast<double>(in.gt_joints[o + 2]);
        frame_err += std::sqrt(dx * dx + dy * dy + dz * dz);
      }
      err += frame_err / kNumJoints;
    }
    err /= cfg_.t_pred;
    if (err < best) {
      best = err;
      r.winner = m;
    }
  }
  r.loss = build_losses(g, r.outputs[r.winner], in);
  return r;
}

template class Network<float>;
template class Network<double>;

}  // namespace lhmp::model
