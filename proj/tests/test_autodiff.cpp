#include <doctest.h>

#include <cmath>
#include <cstring>

#include "lhmp/ad/adam.hpp"
#include "lhmp/ad/gradcheck.hpp"
#include "lhmp/ad/nn.hpp"
#include "lhmp/model/check_suite.hpp"
#include "lhmp/rng.hpp"

using namespace lhmp;
using ad::Graph;
using ad::ParamBinder;
using ad::ParamStore;
using ad::Var;

namespace {

std::vector<double> randvec(Rng& rng, int n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("matmul identity") {
  Graph<double> g;
  std::vector<double> eye = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  Rng rng(1);
  auto xv = randvec(rng, 3 * 7);
  Var I = g.constant({3, 3}, eye);
  Var x = g.constant({3, 7}, xv);
  Var y = g.matmul(I, x);
  auto out = g.value(y);
  for (int i = 0; i < 21; ++i) CHECK(out[i] == xv[i]);
}

TEST_CASE("matmul shape error names both shapes") {
  Graph<double> g;
  Var a = g.zeros_const({2, 3});
  Var b = g.zeros_const({4, 2});
  CHECK_THROWS_WITH_AS(g.matmul(a, b), doctest::Contains("(2,3)"), ContractError);
}

TEST_CASE("softmax of constant rows is uniform") {
  Graph<double> g;
  std::vector<double> v(12, 0.37);
  Var y = g.softmax(g.constant({3, 4}, v));
  auto out = g.value(y);
  for (int i = 0; i < 3; ++i) {
    double sum = 0;
    for (int j = 0; j < 4; ++j) {
      CHECK(out[i * 4 + j] == doctest::Approx(0.25).epsilon(1e-9));
      sum += out[i * 4 + j];
    }
    CHECK(std::abs(sum - 1.0) <= 1e-7);
  }
}

TEST_CASE("max-reduce ties route the gradient to the first row") {
  Graph<double> g;
  std::vector<double> v = {2.0, 1.0,   // row 0
                           2.0, 3.0,   // row 1 (col0 ties row 0)
                           0.0, 3.0};  // row 2 (col1 ties row 1)
  Var x = g.input({3, 2}, v);
  Var m = g.max_rows(x);
  g.backward(g.sum_all(m));
  auto grad = g.gradient(x);
  CHECK(grad[0] == 1.0);  // col 0 -> first max at row 0
  CHECK(grad[2] == 0.0);
  CHECK(grad[3] == 1.0);  // col 1 -> first max at row 1
  CHECK(grad[5] == 0.0);
}

TEST_CASE("backward is linear over summed losses") {
  Rng rng(17);
  for (int rep = 0; rep < 10; ++rep) {
    auto xv = randvec(rng, 12);
    auto build = [&](Graph<double>& g, Var& x, Var& l1, Var& l2) {
      x = g.input({3, 4}, xv);
      Var r = g.relu(x);
      Var s = g.softmax(x);
      l1 = g.sum_all(g.mul(r, s));
      l2 = g.sse(r, s);
    };
    Graph<double> g1, g2, g3;
    Var x1, a1, b1;
    build(g1, x1, a1, b1);
    g1.backward(g1.add(a1, b1));
    Var x2, a2, b2;
    build(g2, x2, a2, b2);
    g2.backward(a2);
    Var x3, a3, b3;
    build(g3, x3, a3, b3);
    g3.backward(b3);
    auto gsum = g1.gradient(x1);
    auto ga = g2.gradient(x2);
    auto gb = g3.gradient(x3);
    for (int i = 0; i < 12; ++i)
      CHECK(gsum[i] == doctest::Approx(ga[i] + gb[i]).epsilon(1e-12));
  }
}

TEST_CASE("graphs are bit-deterministic") {
  auto run = [](std::vector<float>& values, std::vector<float>& grads) {
    Rng rng(123);
    std::vector<float> xv(24);
    for (auto& v : xv) v = static_cast<float>(rng.uniform(-1, 1));
    Graph<float> g;
    Var x = g.input({4, 6}, xv);
    Var h = g.relu(g.matmul(x, g.transpose(x)));
    Var y = g.softmax(h);
    Var loss = g.sse(y, g.zeros_const({4, 4}));
    g.backward(loss);
    values.assign(g.value(y).begin(), g.value(y).end());
    grads.assign(g.gradient(x).begin(), g.gradient(x).end());
  };
  std::vector<float> v1, g1, v2, g2;
  run(v1, g1);
  run(v2, g2);
  CHECK(std::memcmp(v1.data(), v2.data(), v1.size() * sizeof(float)) == 0);
  CHECK(std::memcmp(g1.data(), g2.data(), g1.size() * sizeof(float)) == 0);
}

TEST_CASE("gradient accumulates across shared uses") {
  Graph<double> g;
  std::vector<double> xv = {1.0, 2.0};
  Var x = g.input({1, 2}, xv);
  std::array<Var, 2> twice = {x, x};
  Var stacked = g.concat_rows(twice);
  g.backward(g.sum_all(stacked));
  auto grad = g.gradient(x);
  CHECK(grad[0] == 2.0);
  CHECK(grad[1] == 2.0);
}

TEST_CASE("primitive gradcheck suite stays under 1e-5") {
  for (const auto& line : model::primitive_gradcheck_suite(11, 5)) {
    CAPTURE(line.name);
    CHECK(line.max_rel_err <= 1e-5);
  }
}

TEST_CASE("grad_check on a linear function is near exact") {
  ParamStore<double> store;
  Rng rng(5);
  store.add("x", {1, 6}, randvec(rng, 6));
  auto weights = randvec(rng, 6);
  auto res = ad::grad_check(
      [&](Graph<double>& g, ParamBinder<double>& bind) {
        Var w = g.constant({1, 6}, weights);
        return g.sum_all(g.mul(bind("x"), w));
      },
      store);
  CHECK(res.max_rel_err <= 1e-9);
}

TEST_CASE("grad_check on relu away from the kink") {
  ParamStore<double> store;
  std::vector<double> xv = {0.5, -0.7, 1.2, -0.01, 0.3, 2.0};
  store.add("x", {1, 6}, xv);
  auto res = ad::grad_check(
      [&](Graph<double>& g, ParamBinder<double>& bind) {
        return g.sum_all(g.relu(bind("x")));
      },
      store);
  CHECK(res.max_rel_err <= 1e-6);
}

TEST_CASE("single-head attention over one key row is the value projection") {
  Rng rng(9);
  const int d = 4;
  Graph<double> g;
  ad::AttentionParams<double> p;
  auto w = [&](int n) { return randvec(rng, n, -0.5, 0.5); };
  p.wq = g.input({d, d}, w(16));
  p.wk = g.input({d, d}, w(16));
  p.wv = g.input({d, d}, w(16));
  p.wo = g.input({d, d}, w(16));
  p.bo = g.input({1, d}, w(4));
  Var q_in = g.constant({3, d}, w(12));
  Var kv_in = g.constant({1, d}, w(4));
  Var out = ad::multi_head_attention(g, q_in, kv_in, kv_in, 1, p);
  CHECK(g.rows(out) == 3);
  CHECK(g.cols(out) == d);

  // Softmax over one logit is 1, so every query row returns (kv Wv) Wo + bo.
  Var expected = g.add(g.matmul(g.matmul(kv_in, p.wv), p.wo), p.bo);
  auto ev = g.value(expected);
  auto ov = g.value(out);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < d; ++c) CHECK(std::abs(ov[r * d + c] - ev[c]) <= 1e-6);
}

TEST_CASE("attention rejects widths not divisible by heads") {
  Graph<double> g;
  ad::AttentionParams<double> p;
  std::vector<double> z(36, 0.0);
  p.wq = p.wk = p.wv = p.wo = g.constant({6, 6}, z);
  std::vector<double> zb(6, 0.0);
  p.bo = g.constant({1, 6}, zb);
  Var t = g.zeros_const({2, 6});
  CHECK_THROWS_AS(ad::multi_head_attention(g, t, t, t, 4, p), ConfigError);
}

namespace {

ad::TransformerLayerParams<double> random_layer(Graph<double>& g, Rng& rng, int d,
                                                bool zero_out_projections) {
  ad::TransformerLayerParams<double> p;
  auto w = [&](int r, int c, bool zero) {
    std::vector<double> v(static_cast<size_t>(r) * c, 0.0);
    if (!zero)
      for (auto& x : v) x = rng.uniform(-0.4, 0.4);
    return g.input({r, c}, v);
  };
  std::vector<double> ones(d, 1.0), zeros(d, 0.0);
  p.ln1_gain = g.input({1, d}, ones);
  p.ln1_bias = g.input({1, d}, zeros);
  p.attn.wq = w(d, d, false);
  p.attn.wk = w(d, d, false);
  p.attn.wv = w(d, d, false);
  p.attn.wo = w(d, d, zero_out_projections);
  p.attn.bo = w(1, d, zero_out_projections);
  p.ln2_gain = g.input({1, d}, ones);
  p.ln2_bias = g.input({1, d}, zeros);
  p.ffn_w1 = w(d, 2 * d, false);
  p.ffn_b1 = w(1, 2 * d, false);
  p.ffn_w2 = w(2 * d, d, zero_out_projections);
  p.ffn_b2 = w(1, d, zero_out_projections);
  return p;
}

}  // namespace

TEST_CASE("transformer layer with zeroed output projections is the identity") {
  Rng rng(21);
  Graph<double> g;
  auto p = random_layer(g, rng, 6, /*zero_out_projections=*/true);
  auto tv = randvec(rng, 5 * 6);
  Var tokens = g.constant({5, 6}, tv);
  Var out = ad::transformer_layer(g, tokens, 2, p);
  auto ov = g.value(out);
  for (int i = 0; i < 30; ++i) CHECK(ov[i] == tv[i]);
}

TEST_CASE("transformer layer is permutation-equivariant") {
  Rng rng(33);
  Graph<double> g;
  auto p = random_layer(g, rng, 6, false);
  auto tv = randvec(rng, 5 * 6);
  Var tokens = g.constant({5, 6}, tv);
  Var out = ad::transformer_layer(g, tokens, 2, p);

  std::vector<int> perm = {3, 0, 4, 1, 2};
  Var shuffled = g.gather_rows(tokens, perm);
  Var out_shuffled = ad::transformer_layer(g, shuffled, 2, p);
  auto a = g.value(out);
  auto b = g.value(out_shuffled);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 6; ++c) CHECK(std::abs(b[r * 6 + c] - a[perm[r] * 6 + c]) <= 1e-9);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  ParamStore<float> store;
  Rng rng(2);
  std::vector<float> v(10);
  for (auto& x : v) x = static_cast<float>(rng.uniform(-1, 1));
  store.add("p", {2, 5}, v);
  auto grads = store.make_grad_buffers();
  auto state = ad::AdamState<float>::init(store);
  ad::adam_step(store, grads, ad::AdamConfig{}, state);
  for (int i = 0; i < 10; ++i) CHECK(store.entry(0).value[i] == v[i]);
}

TEST_CASE("adam: one step from zero state matches the closed form") {
  // With zero moments, bias correction gives m_hat = g and v_hat = g^2, so
  // the update is -lr * g / (|g| + eps). Checked in double precision.
  ParamStore<double> store;
  store.add("p", {1, 3}, {1.0, -2.0, 0.5});
  std::vector<std::vector<double>> grads = {{0.3, -0.2, 0.0}};
  auto state = ad::AdamState<double>::init(store);
  ad::AdamConfig cfg;
  cfg.lr = 1e-2;
  ad::adam_step(store, grads, cfg, state);
  std::vector<double> expect = {1.0 - 1e-2 * (0.3 / (0.3 + cfg.eps)),
                                -2.0 - 1e-2 * (-0.2 / (0.2 + cfg.eps)), 0.5};
  for (int i = 0; i < 3; ++i)
    CHECK(std::abs(store.entry(0).value[i] - expect[i]) <= 1e-9);
  CHECK(state.step == 1);
}

TEST_CASE("adam: quadratic bowl converges") {
  ParamStore<float> store;
  store.add("x", {1, 4}, {1.0f, -1.5f, 0.7f, 2.0f});
  auto state = ad::AdamState<float>::init(store);
  ad::AdamConfig cfg;
  cfg.lr = 1e-2;
  double prev = 1e30;
  for (int step = 0; step < 200; ++step) {
    auto& x = store.entry(0).value;
    std::vector<std::vector<float>> grads(1);
    grads[0].resize(4);
    for (int i = 0; i < 4; ++i) grads[0][i] = 2.0f * x[i];
    ad::adam_step(store, grads, cfg, state);
    double norm = 0;
    for (float v : x) norm += static_cast<double>(v) * v;
    if (step > 20) CHECK(norm < prev + 1e-12);
    prev = norm;
  }
  CHECK(prev < 0.5);
}

TEST_CASE("adam: NaN gradients raise a divergence error") {
  ParamStore<float> store;
  store.add("p", {1, 2}, {0.f, 0.f});
  auto state = ad::AdamState<float>::init(store);
  std::vector<std::vector<float>> grads = {{std::nanf(""), 0.f}};
  CHECK_THROWS_AS(ad::adam_step(store, grads, ad::AdamConfig{}, state),
                  ad::TrainingDivergence);
}

TEST_CASE("parameters register exactly once") {
  ParamStore<float> store;
  store.add("w", {1, 2}, {0.f, 0.f});
  CHECK_THROWS_AS(store.add("w", {1, 2}, {0.f, 0.f}), ContractError);
}
