#pragma once

#include <cstdint>
#include <stdexcept>

#include "lhmp/ad/params.hpp"

namespace lhmp::ad {

// Raised when gradients go non-finite; the trainer aborts and keeps the last
// good checkpoint.
class TrainingDivergence : public std::runtime_error {
public:
  explicit TrainingDivergence(const std::string& msg) : std::runtime_error(msg) {}
};

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <class S>
struct AdamState {
  std::vector<std::vector<S>> m, v;
  std::int64_t step = 0;

  static AdamState init(const ParamStore<S>& store) {
    AdamState s;
    s.m = store.make_grad_buffers();
    s.v = store.make_grad_buffers();
    return s;
  }
};

// Bias-corrected Adam update, in place. The moment math runs in double and is
// stored back in S so checkpoint round-trips are exact.
template <class S>
void adam_step(ParamStore<S>& params, const std::vector<std::vector<S>>& grads,
               const AdamConfig& cfg, AdamState<S>& state);

}  // namespace lhmp::ad
