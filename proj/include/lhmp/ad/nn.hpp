#pragma once

#include "lhmp/ad/graph.hpp"

namespace lhmp::ad {

// Query/key/value projections are bias-free (a key bias shifts every logit in
// a softmax row equally, making it a dead parameter); only the output
// projection carries a bias.
template <class S>
struct AttentionParams {
  Var wq, wk, wv, wo, bo;
};

// Scaled dot-product multi-head attention over projected inputs. Queries come
// from `query_in` (L_q x d), keys/values from `key_in`/`value_in` (L_k x d);
// self-attention is the special case of passing the same tokens everywhere.
template <class S>
Var multi_head_attention(Graph<S>& g, Var query_in, Var key_in, Var value_in,
                         int heads, const AttentionParams<S>& p);

template <class S>
struct TransformerLayerParams {
  Var ln1_gain, ln1_bias;
  AttentionParams<S> attn;
  Var ln2_gain, ln2_bias;
  Var ffn_w1, ffn_b1, ffn_w2, ffn_b2;  // d -> 2d -> d, ReLU between
};

// Pre-norm residual block: x + MHA(LN(x)) followed by x + FFN(LN(x)).
template <class S>
Var transformer_layer(Graph<S>& g, Var tokens, int heads,
                      const TransformerLayerParams<S>& p);

}  // namespace lhmp::ad
