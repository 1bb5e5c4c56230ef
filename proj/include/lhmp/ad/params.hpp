#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "lhmp/ad/graph.hpp"

namespace lhmp::ad {

// Named parameter store. Each parameter is registered exactly once; forward
// passes bind entries into a graph as differentiable leaves via ParamBinder.
template <class S>
class ParamStore {
public:
  struct Entry {
    std::string name;
    std::vector<int> dims;
    std::vector<S> value;
  };

  int add(std::string name, std::vector<int> dims, std::vector<S> value) {
    LHMP_CHECK(index_.find(name) == index_.end(), "parameter registered twice: ", name);
    size_t n = 1;
    for (int d : dims) n *= static_cast<size_t>(d);
    LHMP_CHECK(value.size() == n, "parameter ", name, ": value size mismatch");
    entries_.push_back(Entry{std::move(name), std::move(dims), std::move(value)});
    index_[entries_.back().name] = static_cast<int>(entries_.size()) - 1;
    return static_cast<int>(entries_.size()) - 1;
  }

  int find(const std::string& name) const {
    auto it = index_.find(name);
    LHMP_CHECK(it != index_.end(), "unknown parameter: ", name);
    return it->second;
  }

  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  Entry& entry(int i) { return entries_[i]; }
  const Entry& entry(int i) const { return entries_[i]; }
  Entry& entry(const std::string& name) { return entries_[find(name)]; }
  const Entry& entry(const std::string& name) const { return entries_[find(name)]; }
  int count() const { return static_cast<int>(entries_.size()); }

  size_t total_scalars() const {
    size_t n = 0;
    for (const auto& e : entries_) n += e.value.size();
    return n;
  }

  // Zero-filled gradient buffers matching every entry.
  std::vector<std::vector<S>> make_grad_buffers() const {
    std::vector<std::vector<S>> g(entries_.size());
    for (size_t i = 0; i < entries_.size(); ++i) g[i].assign(entries_[i].value.size(), S(0));
    return g;
  }

  template <class S2>
  ParamStore<S2> cast() const {
    ParamStore<S2> out;
    for (const auto& e : entries_) {
      std::vector<S2> v(e.value.begin(), e.value.end());
      out.add(e.name, e.dims, std::move(v));
    }
    return out;
  }

private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, int> index_;
};

// Binds store entries into one graph, creating each leaf at most once so
// parameters shared across the forward pass accumulate gradients in a single
// node. After backward, collect_grads() adds the leaf gradients into
// per-parameter buffers.
template <class S>
class ParamBinder {
public:
  // A non-trainable binder mounts parameters as constants; forward passes
  // then skip all backward bookkeeping (evaluation mode).
  ParamBinder(Graph<S>& g, const ParamStore<S>& store, bool trainable = true)
      : graph_(g), store_(store), trainable_(trainable), node_of_(store.count(), -1) {}

  Var operator()(const std::string& name) { return by_index(store_.find(name)); }

  Var by_index(int i) {
    if (node_of_[i] < 0) {
      const auto& e = store_.entry(i);
      node_of_[i] = trainable_ ? graph_.input(e.dims, e.value).id
                               : graph_.constant(e.dims, e.value).id;
    }
    return Var{node_of_[i]};
  }

  void collect_grads(std::vector<std::vector<S>>& grads) const {
    for (int i = 0; i < static_cast<int>(node_of_.size()); ++i) {
      if (node_of_[i] < 0) continue;
      Var v{node_of_[i]};
      if (!graph_.has_gradient(v)) continue;  // off the loss path this sweep
      auto g = graph_.gradient(v);
      auto& out = grads[i];
      for (size_t j = 0; j < g.size(); ++j) out[j] += g[j];
    }
  }

private:
  Graph<S>& graph_;
  const ParamStore<S>& store_;
  bool trainable_;
  std::vector<int> node_of_;
};

}  // namespace lhmp::ad
