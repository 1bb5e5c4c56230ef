#include "lhmp/ad/nn.hpp"

#include <cmath>

namespace lhmp::ad {

template <class S>
Var multi_head_attention(Graph<S>& g, Var query_in, Var key_in, Var value_in,
                         int heads, const AttentionParams<S>& p) {
  const int d = g.cols(query_in);
  LHMP_CONFIG_CHECK(heads >= 1 && d % heads == 0, "attention: width ", d,
                    " not divisible by ", heads, " heads");
  LHMP_CHECK(g.cols(key_in) == d && g.cols(value_in) == d,
             "attention: query/key/value width mismatch");
  LHMP_CHECK(g.rows(key_in) == g.rows(value_in),
             "attention: key/value token count mismatch");
  const int dh = d / heads;

  Var q = g.matmul(query_in, p.wq);
  Var k = g.matmul(key_in, p.wk);
  Var v = g.matmul(value_in, p.wv);

  std::vector<Var> head_outs;
  head_outs.reserve(heads);
  const S inv_sqrt = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dh)));
  for (int h = 0; h < heads; ++h) {
    Var qh = g.slice_cols(q, h * dh, dh);
    Var kh = g.slice_cols(k, h * dh, dh);
    Var vh = g.slice_cols(v, h * dh, dh);
    Var logits = g.scale(g.matmul(qh, g.transpose(kh)), inv_sqrt);
    Var attn = g.softmax(logits);
    head_outs.push_back(g.matmul(attn, vh));
  }
  Var concat = g.concat_cols(head_outs);
  return g.add(g.matmul(concat, p.wo), p.bo);
}

template <class S>
Var transformer_layer(Graph<S>& g, Var tokens, int heads,
                      const TransformerLayerParams<S>& p) {
  Var normed = g.layer_norm(tokens, p.ln1_gain, p.ln1_bias);
  Var attended = multi_head_attention(g, normed, normed, normed, heads, p.attn);
  Var x = g.add(tokens, attended);

  Var normed2 = g.layer_norm(x, p.ln2_gain, p.ln2_bias);
  Var hidden = g.relu(g.add(g.matmul(normed2, p.ffn_w1), p.ffn_b1));
  Var ffn = g.add(g.matmul(hidden, p.ffn_w2), p.ffn_b2);
  return g.add(x, ffn);
}

template Var multi_head_attention<float>(Graph<float>&, Var, Var, Var, int,
                                         const AttentionParams<float>&);
template Var multi_head_attention<double>(Graph<double>&, Var, Var, Var, int,
                                          const AttentionParams<double>&);
template Var transformer_layer<float>(Graph<float>&, Var, int,
                                      const TransformerLayerParams<float>&);
template Var transformer_layer<double>(Graph<double>&, Var, int,
                                       const TransformerLayerParams<double>&);

}  // namespace lhmp::ad
