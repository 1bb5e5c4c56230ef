#include "lhmp/ad/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lhmp::ad {

namespace {

std::string dims_str(const std::vector<int>& d) {
  std::string s = "(";
  for (size_t i = 0; i < d.size(); ++i) s += (i ? "," : "") + std::to_string(d[i]);
  return s + ")";
}

// C[m x n] += or = A[m x k] * B[k x n]; ikj order keeps the inner loops
// contiguous so the compiler can vectorize them.
template <class S>
void gemm(const S* __restrict__ a, const S* __restrict__ b, S* __restrict__ c, int m,
          int k, int n, bool accumulate) {
  if (!accumulate) std::fill(c, c + static_cast<size_t>(m) * n, S(0));
  for (int i = 0; i < m; ++i) {
    const S* __restrict__ arow = a + static_cast<size_t>(i) * k;
    S* __restrict__ crow = c + static_cast<size_t>(i) * n;
    for (int kk = 0; kk < k; ++kk) {
      S av = arow[kk];
      const S* __restrict__ brow = b + static_cast<size_t>(kk) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[m x k] += A[m x n] * B^T where B is [k x n]. Materializes B^T so the
// accumulation runs down contiguous rows (a row-dot-row form defeats the
// vectorizer, which may not reorder strict float reductions).
template <class S>
void gemm_bt(const S* __restrict__ a, const S* __restrict__ b, S* __restrict__ c, int m,
             int n, int k) {
  std::vector<S> bt(static_cast<size_t>(n) * k);
  for (int kk = 0; kk < k; ++kk)
    for (int j = 0; j < n; ++j) bt[static_cast<size_t>(j) * k + kk] = b[static_cast<size_t>(kk) * n + j];
  for (int i = 0; i < m; ++i) {
    const S* __restrict__ arow = a + static_cast<size_t>(i) * n;
    S* __restrict__ crow = c + static_cast<size_t>(i) * k;
    for (int j = 0; j < n; ++j) {
      S av = arow[j];
      const S* __restrict__ btrow = bt.data() + static_cast<size_t>(j) * k;
      for (int kk = 0; kk < k; ++kk) crow[kk] += av * btrow[kk];
    }
  }
}

// C[k x n] += A^T * B where A is [m x k], B is [m x n].
template <class S>
void gemm_at(const S* __restrict__ a, const S* __restrict__ b, S* __restrict__ c, int m,
             int k, int n) {
  for (int i = 0; i < m; ++i) {
    const S* __restrict__ arow = a + static_cast<size_t>(i) * k;
    const S* __restrict__ brow = b + static_cast<size_t>(i) * n;
    for (int kk = 0; kk < k; ++kk) {
      S av = arow[kk];
      if (av == S(0)) continue;
      S* __restrict__ crow = c + static_cast<size_t>(kk) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

template <class S>
size_t Graph<S>::numel(const std::vector<int>& dims) {
  size_t n = 1;
  for (int d : dims) n *= static_cast<size_t>(d);
  return n;
}

template <class S>
int Graph<S>::rows(Var v) const {
  const auto& d = nodes_[v.id].dims;
  size_t n = numel(d);
  int c = d.empty() ? 1 : d.back();
  return static_cast<int>(n / static_cast<size_t>(c));
}

template <class S>
int Graph<S>::cols(Var v) const {
  const auto& d = nodes_[v.id].dims;
  return d.empty() ? 1 : d.back();
}

template <class S>
void Graph<S>::check_same_graph(Var v) const {
  LHMP_CHECK(v.id >= 0 && v.id < static_cast<int>(nodes_.size()),
             "autodiff: dangling node handle");
}

template <class S>
int Graph<S>::new_node(std::vector<int> dims, bool requires_grad) {
  for (int d : dims) LHMP_CHECK(d >= 1, "autodiff: non-positive dimension in ", dims_str(dims));
  Node n;
  n.dims = std::move(dims);
  n.val.resize(numel(n.dims));
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

template <class S>
S* Graph<S>::grad_ptr(int id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad.assign(n.val.size(), S(0));
  n.touched = true;
  return n.grad.data();
}

template <class S>
std::span<const S> Graph<S>::gradient(Var v) const {
  check_same_graph(v);
  const Node& n = nodes_[v.id];
  LHMP_CHECK(!n.grad.empty(), "autodiff: gradient not computed for node ", v.id);
  return n.grad;
}

template <class S>
Var Graph<S>::input(std::vector<int> dims, std::span<const S> data) {
  int id = new_node(std::move(dims), true);
  LHMP_CHECK(data.size() == nodes_[id].val.size(), "autodiff: input data size mismatch");
  std::copy(data.begin(), data.end(), nodes_[id].val.begin());
  return {id};
}

template <class S>
Var Graph<S>::constant(std::vector<int> dims, std::span<const S> data) {
  int id = new_node(std::move(dims), false);
  LHMP_CHECK(data.size() == nodes_[id].val.size(), "autodiff: constant data size mismatch");
  std::copy(data.begin(), data.end(), nodes_[id].val.begin());
  return {id};
}

template <class S>
Var Graph<S>::zeros_const(std::vector<int> dims) {
  return {new_node(std::move(dims), false)};
}

template <class S>
Var Graph<S>::matmul(Var a, Var b) {
  check_same_graph(a);
  check_same_graph(b);
  int m = rows(a), k = cols(a), k2 = rows(b), n = cols(b);
  LHMP_CHECK(k == k2, "matmul: inner dimensions differ, ", dims_str(nodes_[a.id].dims),
             " vs ", dims_str(nodes_[b.id].dims));
  bool rg = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  int id = new_node({m, n}, rg);
  gemm(nodes_[a.id].val.data(), nodes_[b.id].val.data(), nodes_[id].val.data(), m, k, n,
       false);
  if (rg) {
    nodes_[id].backward = [this, a, b, id, m, k, n]() {
      const S* g = nodes_[id].grad.data();
      if (nodes_[a.id].requires_grad)
        gemm_bt(g, nodes_[b.id].val.data(), grad_ptr(a.id), m, n, k);
      if (nodes_[b.id].requires_grad)
        gemm_at(nodes_[a.id].val.data(), g, grad_ptr(b.id), m, k, n);
    };
  }
  return {id};
}

namespace {
enum class BroadcastKind { Same, Row, Scalar };
}

template <class S>
Var Graph<S>::add(Var a, Var b) {
  check_same_graph(a);
  check_same_graph(b);
  int m = rows(a), n = cols(a);
  BroadcastKind bk;
  if (nodes_[b.id].val.size() == 1)
    bk = BroadcastKind::Scalar;
  else if (rows(b) == 1 && cols(b) == n)
    bk = BroadcastKind::Row;
  else {
    LHMP_CHECK(rows(b) == m && cols(b) == n, "add: shape mismatch, ",
               dims_str(nodes_[a.id].dims), " vs ", dims_str(nodes_[b.id].dims));
    bk = BroadcastKind::Same;
  }
  bool rg = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  int id = new_node(nodes_[a.id].dims, rg);
  const S* av = nodes_[a.id].val.data();
  const S* bv = nodes_[b.id].val.data();
  S* ov = nodes_[id].val.data();
  size_t total = nodes_[id].val.size();
  switch (bk) {
    case BroadcastKind::Same:
      for (size_t i = 0; i < total; ++i) ov[i] = av[i] + bv[i];
      break;
    case BroadcastKind::Row:
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) ov[size_t(i) * n + j] = av[size_t(i) * n + j] + bv[j];
      break;
    case BroadcastKind::Scalar:
      for (size_t i = 0; i < total; ++i) ov[i] = av[i] + bv[0];
      break;
  }
  if (rg) {
    nodes_[id].backward = [this, a, b, id, m, n, bk]() {
      const S* g = nodes_[id].grad.data();
      size_t total = nodes_[id].val.size();
      if (nodes_[a.id].requires_grad) {
        S* ga = grad_ptr(a.id);
        for (size_t i = 0; i < total; ++i) ga[i] += g[i];
      }
      if (nodes_[b.id].requires_grad) {
        S* gb = grad_ptr(b.id);
        switch (bk) {
          case BroadcastKind::Same:
            for (size_t i = 0; i < total; ++i) gb[i] += g[i];
            break;
          case BroadcastKind::Row:
            for (int i = 0; i < m; ++i)
              for (int j = 0; j < n; ++j) gb[j] += g[size_t(i) * n + j];
            break;
          case BroadcastKind::Scalar:
            for (size_t i = 0; i < total; ++i) gb[0] += g[i];
            break;
        }
      }
    };
  }
  return {id};
}

template <class S>
Var Graph<S>::mul(Var a, Var b) {
  check_same_graph(a);
  check_same_graph(b);
  int m = rows(a), n = cols(a);
  BroadcastKind bk;
  if (nodes_[b.id].val.size() == 1)
    bk = BroadcastKind::Scalar;
  else if (rows(b) == 1 && cols(b) == n)
    bk = BroadcastKind::Row;
  else {
    LHMP_CHECK(rows(b) == m && cols(b) == n, "mul: shape mismatch, ",
               dims_str(nodes_[a.id].dims), " vs ", dims_str(nodes_[b.id].dims));
    bk = BroadcastKind::Same;
  }
  bool rg = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  int id = new_node(nodes_[a.id].dims, rg);
  const S* av = nodes_[a.id].val.data();
  const S* bv = nodes_[b.id].val.data();
  S* ov = nodes_[id].val.data();
  size_t total = nodes_[id].val.size();
  switch (bk) {
    case BroadcastKind::Same:
      for (size_t i = 0; i < total; ++i) ov[i] = av[i] * bv[i];
      break;
    case BroadcastKind::Row:
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) ov[size_t(i) * n + j] = av[size_t(i) * n + j] * bv[j];
      break;
    case BroadcastKind::Scalar:
      for (size_t i = 0; i < total; ++i) ov[i] = av[i] * bv[0];
      break;
  }
  if (rg) {
    nodes_[id].backward = [this, a, b, id, m, n, bk]() {
      const S* g = nodes_[id].grad.data();
      const S* av = nodes_[a.id].val.data();
      const S* bv = nodes_[b.id].val.data();
      size_t total = nodes_[id].val.size();
      if (nodes_[a.id].requires_grad) {
        S* ga = grad_ptr(a.id);
        switch (bk) {
          case BroadcastKind::Same:
            for (size_t i = 0; i < total; ++i) ga[i] += g[i] * bv[i];
            break;
          case BroadcastKind::Row:
            for (int i = 0; i < m; ++i)
              for (int j = 0; j < n; ++j) ga[size_t(i) * n + j] += g[size_t(i) * n + j] * bv[j];
            break;
          case BroadcastKind::Scalar:
            for (size_t i = 0; i < total; ++i) ga[i] += g[i] * bv[0];
            break;
        }
      }
      if (nodes_[b.id].requires_grad) {
        S* gb = grad_ptr(b.id);
        switch (bk) {
          case BroadcastKind::Same:
            for (size_t i = 0; i < total; ++i) gb[i] += g[i] * av[i];
            break;
          case BroadcastKind::Row:
            for (int i = 0; i < m; ++i)
              for (int j = 0; j < n; ++j) gb[j] += g[size_t(i) * n + j] * av[size_t(i) * n + j];
            break;
          case BroadcastKind::Scalar:
            for (size_t i = 0; i < total; ++i) gb[0] += g[i] * av[i];
            break;
        }
      }
    };
  }
  return {id};
}

template <class S>
Var Graph<S>::scale(Var a, S c) {
  check_same_graph(a);
  bool rg = nodes_[a.id].requires_grad;
  int id = new_node(nodes_[a.id].dims, rg);
  const S* av = nodes_[a.id].val.data();
  S* ov = nodes_[id].val.data();
  for (size_t i = 0; i < nodes_[id].val.size(); ++i) ov[i] = av[i] * c;
  if (rg) {
    nodes_[id].backward = [this, a, id, c]() {
      const S* g = nodes_[id].grad.data();
      S* ga = grad_ptr(a.id);
      for (size_t i = 0; i < nodes_[id].val.size(); ++i) ga[i] += g[i] * c;
    };
  }
  return {id};
}

template <class S>
Var Graph<S>::concat_rows(std::span<const Var> parts) {
  LHMP_CHECK(!parts.empty(), "concat_rows: no inputs");
  int n = cols(parts[0]);
  int total_rows = 0;
  bool rg = false;
  for (Var p : parts) {
    check_same_graph(p);
    LHMP_CHECK(cols(p) == n, "concat_rows: column mismatch");
    total_rows += rows(p);
    rg = rg || nodes_[p.id].requires_grad;
  }
  int id = new_node({total_rows, n}, rg);
  S* ov = nodes_[id].val.data();
  size_t off = 0;
  for (Var p : parts) {
    const auto& v = nodes_[p.id].val;
    std::copy(v.begin(), v.end(), ov + off);
    off += v.size();
  }
  if (rg) {
    std::vector<Var> ps(parts.begin(), parts.end());
    nodes_[id].backward = [this, ps, id]() {
      const S* g = nodes_[id].grad.data();
      size_t off = 0;
      for (Var p : ps) {
        size_t len = nodes_[p.id].val.size();
        if (nodes_[p.id].requires_grad) {
          S* gp = grad_ptr(p.id);
          for (size_t i = 0; i < len; ++i) gp[i] += g[off + i];
        }
        off += len;
      }
    };
  }
  return {id};
}

template <class S>
Var Graph<S>::concat_cols(std::span<const Var> parts) {
  LHMP_CHECK(!parts.empty(), "concat_cols: no inputs");
  int m = rows(parts[0]);
  int total_cols = 0;
  bool rg = false;
  for (Var p : parts) {
    check_same_graph(p);
    LHMP_CHECK(rows(p) == m, "concat_cols: row mismatch");
    total_cols += cols(p);
    rg = rg || nodes_[p.id].requires_grad;
  }
  int id = new_node({m, total_cols}, rg);
  S* ov = nodes_[id].val.data();
  int coff = 0;
  for (Var p : parts) {
    int pc = cols(p);
    const S* pv = nodes_[p.id].val.data();
    for (int i = 0; i < m; ++i)
      std::copy(pv + size_t(i) * pc, pv + size_t(i + 1) * pc,
                ov + size_t(i) * total_cols + coff);
    coff += pc;
  }
  if (rg) {
    std::vector<Var> ps(parts.begin(), parts.end());
    nodes_[id].backward = [this, ps, id, m, total_cols]() {
      const S* g = nodes_[id].grad.data();
      int coff = 0;
      for (Var p : ps) {
        int pc = cols(p);
        if (nodes_[p.id].requires_grad) {
          S* gp = grad_ptr(p.id);
          for (int i = 0; i < m; ++i)
            for (int j = 0; j < pc; ++j)
              gp[size_t(i) * pc + j] += g[size_t(i) * total_cols + coff + j];
        }
        coff += pc;
      }
    };
  }
  return {id};
}

template <class S>
Var Graph<S>::gather_rows(Var a, std::vector<int> idx) {
  check_same_graph(a);
  int m = rows(a), n = cols(a);
  for (int i : idx) LHMP_CHECK(i >= 0 && i < m, "gather_rows: index ", i, " out of range");
  bool rg = nodes_[a.id].requires_grad;
  int id = new_node({static_cast<int>(idx.size()), n}, rg);
  const S* av = nodes_[a.id].val.data();
  S* ov = nodes_[id].val.data();
  for (size_t r = 0; r < idx.size(); ++r)
    std::copy(av + size_t(idx[r]) * n, av + size_t(idx[r] + 1) * n, ov + r * n);
  if (rg) {
    nodes_[id].backward = [this, a, id, idx = std::move(idx), n]() {
      const S* g = nodes_[id].grad.data();
      S* ga = grad_ptr(a.id);
      for (size_t r = 0; r < idx.size(); ++r)
        for (int j = 0; j < n; ++j) ga[size_t(idx[r]) * n + j] += g[r * n + j];
    };
  }
  return {id};
}

template <class S>
Var Graph<S>::slice_rows(Var a, int row0, int n_rows) {
  check_same_graph(a);
  int m = rows(a), n = cols(a);
  LHMP_CHECK(row0 >= 0 && n_rows >= 1 && row0 + n_rows <= m, "slice_rows: range [", row0,
             ",", row0 + n_rows, ") out of ", m, " rows");
  bool rg = nodes_[a.id].requires_grad;
  int id = new_node({n_rows, n}, rg);
  const S* av = nodes_[a.id].val.data();
  std::copy(av + size_t(row0) * n, av + size_t(row0 + n_rows) * n, nodes_[id].val.data());
  if (rg) {
    nodes_[id].backward = [this, a, id, row0, n_rows, n]() {
      const S* g = nodes_[id].grad.data();
      S* ga = grad_ptr(a.id);
      for (size_t i = 0; i < size_t(n_rows) * n; ++i) ga[size_t(row0) * n + i] += g[i];
    };
  }
  return {id};
}

template <class S>
Var Graph<S>::slice_cols(Var a, int col0, int n_cols) {
  check_same_graph(a);
  int m = rows(a), n = cols(a);
  LHMP_CHECK(col0 >= 0 && n_cols >= 1 && col0 + n_cols <= n, "slice_cols: range [", col0,
             ",", col0 + n_cols, ") out of ", n, " cols");
  bool rg = nodes_[a.id].requires_grad;
  int id = new_node({m, n_cols}, rg);
  const S* av = nodes_[a.id].val.data();
  S* ov = nodes_[id].val.data();
  for (int i = 0; i < m; ++i)
    std::copy(av + size_t(i) * n + col0, av + size_t(i) * n + col0 + n_cols,
              ov + size_t(i) * n_cols);
  if (rg) {
    nodes_[id].backward = [this, a, id, col0, n_cols, m, n]() {
      const S* g = nodes_[id].grad.data();
      S* ga = grad_ptr(a.id);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n_cols; ++j)
          ga[size_t(i) * n + col0 + j] += g[size_t(i) * n_cols + j];
    };
  }
  return {id};
}

template <class S>
Var Graph<S>::reshape(Var a, std::vector<int> dims) {
  check_same_graph(a);
  LHMP_CHECK(numel(dims) == nodes_[a.id].val.size(), "reshape: element count mismatch, ",
             dims_str(nodes_[a.id].dims), " -> ", dims_str(dims));
  bool rg = nodes_[a.id].requires_grad;
  int id = new_node(std::move(dims), rg);
  nodes_[id].val = nodes_[a.id].val;
  if (rg) {
    nodes_[id].backward = [this, a, id]() {
      const S* g = nodes_[id].grad.data();
      S* ga = grad_ptr(a.id);
      for (size_t i = 0; i < nodes_[id].val.size(); ++i) ga[i] += g[i];
    };
  }
  return {id};
}

template <class S>
Var Graph<S>::transpose(Var a) {
  check_same_graph(a);
  int m = rows(a), n = cols(a);
  bool rg = nodes_[a.id].requires_grad;
  int id = new_node({n, m}, rg);
  const S* av = nodes_[a.id].val.data();
  S* ov = nodes_[id].val.data();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) ov[size_t(j) * m + i] = av[size_t(i) * n + j];
  if (rg) {
    nodes_[id].backward = [this, a, id, m, n]() {
      const S* g = nodes_[id].grad.data();
      S* ga = grad_ptr(a.id);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) ga[size_t(i) * n + j] += g[size_t(j) * m + i];
    };
  }
  return {id};
}

template <class S>
Var Graph<S>::relu(Var a) {
  check_same_graph(a);
  bool rg = nodes_[a.id].requires_grad;
  int id = new_node(nodes_[a.id].dims, rg);
  const S* av = nodes_[a.id].val.data();
  S* ov = nodes_[id].val.data();
  for (size_t i = 0; i < nodes_[id].val.size(); ++i) ov[i] = av[i] > S(0) ? av[i] : S(0);
  if (rg) {
    nodes_[id].backward = [this, a, id]() {
      const S* g = nodes_[id].grad.data();
      const S* av = nodes_[a.id].val.data();
      S* ga = grad_ptr(a.id);
      for (size_t i = 0; i < nodes_[id].val.size(); ++i)
        if (av[i] > S(0)) ga[i] += g[i];
    };
  }
  return {id};
}

template <class S>
Var Graph<S>::softmax(Var a) {
  check_same_graph(a);
  int m = rows(a), n = cols(a);
  bool rg = nodes_[a.id].requires_grad;
  int id = new_node(nodes_[a.id].dims, rg);
  const S* av = nodes_[a.id].val.data();
  S* ov = nodes_[id].val.data();
  for (int i = 0; i < m; ++i) {
    const S* x = av + size_t(i) * n;
    S* y = ov + size_t(i) * n;
    S mx = x[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, x[j]);
    S sum = 0;
    for (int j = 0; j < n; ++j) {
      y[j] = std::exp(x[j] - mx);
      sum += y[j];
    }
    for (int j = 0; j < n; ++j) y[j] /= sum;
  }
  if (rg) {
    nodes_[id].backward = [this, a, id, m, n]() {
      const S* g = nodes_[id].grad.data();
      const S* y = nodes_[id].val.data();
      S* ga = grad_ptr(a.id);
      for (int i = 0; i < m; ++i) {
        const S* gi = g + size_t(i) * n;
        const S* yi = y + size_t(i) * n;
        S dot = 0;
        for (int j = 0; j < n; ++j) dot += gi[j] * yi[j];
        S* gai = ga + size_t(i) * n;
        for (int j = 0; j < n; ++j) gai[j] += yi[j] * (gi[j] - dot);
      }
    };
  }
  return {id};
}

template <class S>
Var Graph<S>::layer_norm(Var a, Var gain, Var bias) {
  check_same_graph(a);
  check_same_graph(gain);
  check_same_graph(bias);
  int m = rows(a), n = cols(a);
  LHMP_CHECK(static_cast<int>(nodes_[gain.id].val.size()) == n &&
                 static_cast<int>(nodes_[bias.id].val.size()) == n,
             "layer_norm: gain/bias must have ", n, " elements");
  constexpr S kEps = S(1e-5);
  bool rg = nodes_[a.id].requires_grad || nodes_[gain.id].requires_grad ||
            nodes_[bias.id].requires_grad;
  int id = new_node(nodes_[a.id].dims, rg);
  const S* av = nodes_[a.id].val.data();
  const S* gv = nodes_[gain.id].val.data();
  const S* bv = nodes_[bias.id].val.data();
  S* ov = nodes_[id].val.data();
  std::vector<S> inv_std(m), mean(m);
  for (int i = 0; i < m; ++i) {
    const S* x = av + size_t(i) * n;
    S mu = 0;
    for (int j = 0; j < n; ++j) mu += x[j];
    mu /= n;
    S var = 0;
    for (int j = 0; j < n; ++j) var += (x[j] - mu) * (x[j] - mu);
    var /= n;
    S is = S(1) / std::sqrt(var + kEps);
    mean[i] = mu;
    inv_std[i] = is;
    S* y = ov + size_t(i) * n;
    for (int j = 0; j < n; ++j) y[j] = (x[j] - mu) * is * gv[j] + bv[j];
  }
  if (rg) {
    nodes_[id].backward = [this, a, gain, bias, id, m, n, mean = std::move(mean),
                           inv_std = std::move(inv_std)]() {
      const S* g = nodes_[id].grad.data();
      const S* av = nodes_[a.id].val.data();
      const S* gv = nodes_[gain.id].val.data();
      for (int i = 0; i < m; ++i) {
        const S* gi = g + size_t(i) * n;
        const S* x = av + size_t(i) * n;
        S mu = mean[i], is = inv_std[i];
        if (nodes_[gain.id].requires_grad) {
          S* gg = grad_ptr(gain.id);
          for (int j = 0; j < n; ++j) gg[j] += gi[j] * (x[j] - mu) * is;
        }
        if (nodes_[bias.id].requires_grad) {
          S* gb = grad_ptr(bias.id);
          for (int j = 0; j < n; ++j) gb[j] += gi[j];
        }
        if (nodes_[a.id].requires_grad) {
          // dL/dx = is/n * (n*dxhat - sum(dxhat) - xhat*sum(dxhat*xhat))
          S sum_dxh = 0, sum_dxh_xh = 0;
          for (int j = 0; j < n; ++j) {
            S xh = (x[j] - mu) * is;
            S dxh = gi[j] * gv[j];
            sum_dxh += dxh;
            sum_dxh_xh += dxh * xh;
          }
          S* ga = grad_ptr(a.id) + size_t(i) * n;
          for (int j = 0; j < n; ++j) {
            S xh = (x[j] - mu) * is;
            S dxh = gi[j] * gv[j];
            ga[j] += is / n * (S(n) * dxh - sum_dxh - xh * sum_dxh_xh);
          }
        }
      }
    };
  }
  return {id};
}

template <class S>
Var Graph<S>::max_rows(Var a) {
  check_same_graph(a);
  int m = rows(a), n = cols(a);
  bool rg = nodes_[a.id].requires_grad;
  int id = new_node({1, n}, rg);
  const S* av = nodes_[a.id].val.data();
  S* ov = nodes_[id].val.data();
  std::vector<int> argmax(n, 0);
  for (int j = 0; j < n; ++j) {
    S best = av[j];
    int bi = 0;
    for (int i = 1; i < m; ++i) {
      S v = av[size_t(i) * n + j];
      if (v > best) {  // strict: ties keep the first index
        best = v;
        bi = i;
      }
    }
    ov[j] = best;
    argmax[j] = bi;
  }
  if (rg) {
    nodes_[id].backward = [this, a, id, n, argmax = std::move(argmax)]() {
      const S* g = nodes_[id].grad.data();
      S* ga = grad_ptr(a.id);
      for (int j = 0; j < n; ++j) ga[size_t(argmax[j]) * n + j] += g[j];
    };
  }
  return {id};
}

template <class S>
Var Graph<S>::mean_all(Var a) {
  check_same_graph(a);
  bool rg = nodes_[a.id].requires_grad;
  int id = new_node({1}, rg);
  size_t total = nodes_[a.id].val.size();
  S sum = 0;
  for (S v : nodes_[a.id].val) sum += v;
  nodes_[id].val[0] = sum / static_cast<S>(total);
  if (rg) {
    nodes_[id].backward = [this, a, id, total]() {
      S g = nodes_[id].grad[0] / static_cast<S>(total);
      S* ga = grad_ptr(a.id);
      for (size_t i = 0; i < total; ++i) ga[i] += g;
    };
  }
  return {id};
}

template <class S>
Var Graph<S>::sum_all(Var a) {
  check_same_graph(a);
  bool rg = nodes_[a.id].requires_grad;
  int id = new_node({1}, rg);
  S sum = 0;
  for (S v : nodes_[a.id].val) sum += v;
  nodes_[id].val[0] = sum;
  if (rg) {
    nodes_[id].backward = [this, a, id]() {
      S g = nodes_[id].grad[0];
      S* ga = grad_ptr(a.id);
      for (size_t i = 0; i < nodes_[a.id].val.size(); ++i) ga[i] += g;
    };
  }
  return {id};
}

template <class S>
Var Graph<S>::sse(Var a, Var b) {
  check_same_graph(a);
  check_same_graph(b);
  LHMP_CHECK(nodes_[a.id].val.size() == nodes_[b.id].val.size(),
             "sse: element count mismatch, ", dims_str(nodes_[a.id].dims), " vs ",
             dims_str(nodes_[b.id].dims));
  bool rg = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  int id = new_node({1}, rg);
  const S* av = nodes_[a.id].val.data();
  const S* bv = nodes_[b.id].val.data();
  S sum = 0;
  for (size_t i = 0; i < nodes_[a.id].val.size(); ++i) {
    S d = av[i] - bv[i];
    sum += d * d;
  }
  nodes_[id].val[0] = sum;
  if (rg) {
    nodes_[id].backward = [this, a, b, id]() {
      S g = nodes_[id].grad[0];
      const S* av = nodes_[a.id].val.data();
      const S* bv = nodes_[b.id].val.data();
      size_t total = nodes_[a.id].val.size();
      if (nodes_[a.id].requires_grad) {
        S* ga = grad_ptr(a.id);
        for (size_t i = 0; i < total; ++i) ga[i] += S(2) * g * (av[i] - bv[i]);
      }
      if (nodes_[b.id].requires_grad) {
        S* gb = grad_ptr(b.id);
        for (size_t i = 0; i < total; ++i) gb[i] -= S(2) * g * (av[i] - bv[i]);
      }
    };
  }
  return {id};
}

template <class S>
Var Graph<S>::chamfer_vs(Var pred, std::span<const S> gt_xyz) {
  check_same_graph(pred);
  LHMP_CHECK(cols(pred) == 3, "chamfer_vs: predictions must be P x 3");
  LHMP_CHECK(gt_xyz.size() % 3 == 0 && !gt_xyz.empty(), "chamfer_vs: bad ground truth");
  const int p_count = rows(pred);
  const int m_count = static_cast<int>(gt_xyz.size() / 3);
  bool rg = nodes_[pred.id].requires_grad;
  int id = new_node({1}, rg);
  const S* pv = nodes_[pred.id].val.data();

  auto d2 = [&](int i, int j) {
    S dx = pv[i * 3 + 0] - gt_xyz[j * 3 + 0];
    S dy = pv[i * 3 + 1] - gt_xyz[j * 3 + 1];
    S dz = pv[i * 3 + 2] - gt_xyz[j * 3 + 2];
    return dx * dx + dy * dy + dz * dz;
  };

  std::vector<int> nn_pred(p_count), nn_gt(m_count);
  S term_pred = 0, term_gt = 0;
  for (int i = 0; i < p_count; ++i) {
    S best = std::numeric_limits<S>::max();
    int bj = 0;
    for (int j = 0; j < m_count; ++j) {
      S d = d2(i, j);
      if (d < best) {
        best = d;
        bj = j;
      }
    }
    nn_pred[i] = bj;
    term_pred += best;
  }
  for (int j = 0; j < m_count; ++j) {
    S best = std::numeric_limits<S>::max();
    int bi = 0;
    for (int i = 0; i < p_count; ++i) {
      S d = d2(i, j);
      if (d < best) {
        best = d;
        bi = i;
      }
    }
    nn_gt[j] = bi;
    term_gt += best;
  }
  nodes_[id].val[0] = term_pred / S(p_count) + term_gt / S(m_count);

  if (rg) {
    std::vector<S> gt(gt_xyz.begin(), gt_xyz.end());
    nodes_[id].backward = [this, pred, id, p_count, m_count, gt = std::move(gt),
                           nn_pred = std::move(nn_pred), nn_gt = std::move(nn_gt)]() {
      S g = nodes_[id].grad[0];
      const S* pv = nodes_[pred.id].val.data();
      S* gp = grad_ptr(pred.id);
      for (int i = 0; i < p_count; ++i) {
        int j = nn_pred[i];
        for (int c = 0; c < 3; ++c)
          gp[i * 3 + c] += g * S(2) * (pv[i * 3 + c] - gt[j * 3 + c]) / S(p_count);
      }
      for (int j = 0; j < m_count; ++j) {
        int i = nn_gt[j];
        for (int c = 0; c < 3; ++c)
          gp[i * 3 + c] += g * S(2) * (pv[i * 3 + c] - gt[j * 3 + c]) / S(m_count);
      }
    };
  }
  return {id};
}

template <class S>
void Graph<S>::backward(Var loss) {
  check_same_graph(loss);
  LHMP_CHECK(nodes_[loss.id].val.size() == 1, "backward: loss must be scalar");
  for (Node& n : nodes_) {
    n.touched = false;
    if (!n.grad.empty()) std::fill(n.grad.begin(), n.grad.end(), S(0));
  }
  *grad_ptr(loss.id) = S(1);
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.touched && n.backward) n.backward();
  }
}

template class Graph<float>;
template class Graph<double>;

}  // namespace lhmp::ad
