#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lhmp/common.hpp"

namespace lhmp::ad {

// Handle into a Graph's node arena.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Define-by-run reverse-mode tape. A graph instance is built per forward
// pass, is single-owner, and node creation order doubles as the topological
// order for the backward sweep. Gradients accumulate with +=, so shared
// parameters (e.g. a query bank used by several frames) just work.
//
// Tensors are N-dimensional, but every operation views a tensor as a
// (rows x cols) matrix with cols = last dimension. Broadcasting is limited to
// the leading axis: a (1 x cols) or scalar right operand of add/mul is
// repeated across rows.
template <class S>
class Graph {
public:
  Graph() = default;
  // Backward closures capture `this`; pin the graph in place.
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  struct Node {
    std::vector<int> dims;
    std::vector<S> val;
    std::vector<S> grad;       // allocated lazily on first backward touch
    bool requires_grad = false;
    bool touched = false;      // received gradient during the current sweep
    std::function<void()> backward;
  };

  // Leaf creation. `input` participates in differentiation, `constant` not.
  Var input(std::vector<int> dims, std::span<const S> data);
  Var constant(std::vector<int> dims, std::span<const S> data);
  Var zeros_const(std::vector<int> dims);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, S c);
  Var concat_rows(std::span<const Var> parts);
  Var concat_cols(std::span<const Var> parts);
  Var gather_rows(Var a, std::vector<int> idx);
  Var slice_rows(Var a, int row0, int n_rows);
  Var slice_cols(Var a, int col0, int n_cols);
  Var reshape(Var a, std::vector<int> dims);
  Var transpose(Var a);
  Var relu(Var a);
  Var softmax(Var a);  // along the last axis
  Var layer_norm(Var a, Var gain, Var bias);
  Var max_rows(Var a);   // max-reduce over rows; ties route to the first index
  Var mean_all(Var a);
  Var sum_all(Var a);
  Var sse(Var a, Var b);  // sum of squared differences, scalar
  // Chamfer distance between the P x 3 rows of `pred` and a fixed point set
  // (flattened M x 3). Nearest-neighbor assignments are frozen at forward
  // time, giving the exact gradient almost everywhere.
  Var chamfer_vs(Var pred, std::span<const S> gt_xyz);

  void backward(Var loss);

  const std::vector<int>& dims(Var v) const { return nodes_[v.id].dims; }
  std::span<const S> value(Var v) const { return nodes_[v.id].val; }
  std::span<const S> gradient(Var v) const;
  // False for nodes the last backward sweep never reached (their gradient is
  // identically zero).
  bool has_gradient(Var v) const { return !nodes_[v.id].grad.empty(); }
  int rows(Var v) const;
  int cols(Var v) const;
  size_t size() const { return nodes_.size(); }

private:
  std::vector<Node> nodes_;

  int new_node(std::vector<int> dims, bool requires_grad);
  S* grad_ptr(int id);  // allocates + marks touched
  static size_t numel(const std::vector<int>& dims);
  void check_same_graph(Var v) const;
};

using GraphF = Graph<float>;
using GraphD = Graph<double>;

}  // namespace lhmp::ad
