#pragma once

#include <cstdint>
#include <vector>

#include "lhmp/ad/nn.hpp"
#include "lhmp/ad/params.hpp"
#include "lhmp/model/config.hpp"
#include "lhmp/pcops.hpp"

namespace lhmp::model {

// One observed frame as the network consumes it: normalized xyz (n_points*3,
// row-major) plus the part bins over those points.
template <class S>
struct FrameInput {
  std::vector<S> points_xyz;
  pcops::PartBins bins;
};

// A training/eval window in normalized coordinates. gt_joints covers all
// t_obs + t_pred frames (the coarse and final heads reconstruct observed
// frames too). gt_clouds holds one raw-but-centered cloud per frame; an empty
// cloud skips that frame's Chamfer term.
template <class S>
struct SampleInput {
  std::vector<FrameInput<S>> observed;
  std::vector<S> gt_joints;
  std::vector<std::vector<S>> gt_clouds;
};

// Graph handles for one hypothesis' forward pass.
struct ForwardNodes {
  ad::Var descriptor;     // (t_obs*(K+1)) x d1, post enhancement
  ad::Var mapped;         // F, (T*(K+1)) x d1, straight out of the MHCA
  ad::Var refined;        // F', same shape, after the ST/TT stack
  ad::Var coarse_joints;  // (T*24) x 3
  ad::Var tokens;         // STCR grid, (T*(K+25)) x d2
  ad::Var final_joints;   // (T*24) x 3
  ad::Var pred_points;    // (T*K*32) x 3
};

struct LossNodes {
  ad::Var initial, final_, points, total;
  int skipped_cloud_frames = 0;
};

template <class S>
class Network {
public:
  explicit Network(ModelConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

  const ModelConfig& config() const { return cfg_; }

  // Registers every parameter (seeded init: Xavier for linear maps, N(0,0.02)
  // for the query banks and positional encodings, identity layer norms).
  ad::ParamStore<S> init_params(std::uint64_t seed) const;

  // Per-point MLP and channel-wise max pooling. Returns {pointwise, global}.
  std::pair<ad::Var, ad::Var> encode_frame(ad::Graph<S>& g, ad::ParamBinder<S>& bind,
                                           const FrameInput<S>& frame) const;

  // Structure-aware body feature descriptor over the observed frames:
  // global + per-part max-pooled tokens, then one spatial and one temporal
  // transformer layer.
  ad::Var build_descriptor(ad::Graph<S>& g, ad::ParamBinder<S>& bind,
                           const SampleInput<S>& in) const;

  struct Mapped {
    ad::Var f, f_refined, coarse;
  };
  // Learnable-query cross-attention from the descriptor onto all T frames,
  // ST/TT refinement, and the coarse joint head.
  Mapped motion_latent_map(ad::Graph<S>& g, ad::ParamBinder<S>& bind, ad::Var descriptor,
                           int hypothesis) const;

  // Embeds coarse joints and refined features to d2 tokens and runs the
  // positional-encoded ST/TT stack.
  ad::Var stcr_refine(ad::Graph<S>& g, ad::ParamBinder<S>& bind, ad::Var coarse,
                      ad::Var f_refined) const;

  struct Heads {
    ad::Var joints, points;
  };
  Heads decode_heads(ad::Graph<S>& g, ad::ParamBinder<S>& bind, ad::Var tokens) const;

  ForwardNodes forward(ad::Graph<S>& g, ad::ParamBinder<S>& bind,
                       const SampleInput<S>& in, int hypothesis = 0) const;

  // All hypotheses, reusing one descriptor computation.
  std::vector<ForwardNodes> forward_diverse(ad::Graph<S>& g, ad::ParamBinder<S>& bind,
                                            const SampleInput<S>& in) const;

  LossNodes build_losses(ad::Graph<S>& g, const ForwardNodes& fwd,
                         const SampleInput<S>& in) const;

  struct WtaResult {
    LossNodes loss;
    int winner = 0;
    std::vector<ForwardNodes> outputs;
  };
  // Winner-take-all: picks the hypothesis with the least mean MPJPE over the
  // prediction horizon (selection runs on values, outside the tape) and
  // builds the loss for that hypothesis only.
  WtaResult wta_loss(ad::Graph<S>& g, ad::ParamBinder<S>& bind,
                     const SampleInput<S>& in) const;

  // Future poses of one hypothesis, converted from node values.
  std::vector<Pose> future_poses(const ad::Graph<S>& g, const ForwardNodes& fwd) const;

private:
  ad::TransformerLayerParams<S> bind_layer(ad::ParamBinder<S>& bind,
                                           const std::string& prefix) const;
  ad::Var run_spatial(ad::Graph<S>& g, ad::Var grid, int n_frames, int tokens_per_frame,
                      int heads, const ad::TransformerLayerParams<S>& p,
                      ad::Var pe = {}) const;
  ad::Var run_temporal(ad::Graph<S>& g, ad::Var grid, int n_frames, int tokens_per_frame,
                       int heads, const ad::TransformerLayerParams<S>& p,
                       ad::Var pe = {}) const;

  ModelConfig cfg_;
};

using NetworkF = Network<float>;
using NetworkD = Network<double>;

}  // namespace lhmp::model
