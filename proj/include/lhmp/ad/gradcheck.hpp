#pragma once

#include <functional>

#include "lhmp/ad/params.hpp"

namespace lhmp::ad {

// Builds a scalar-loss graph from the store. Called many times during finite
// differencing, so it must be a pure function of the store values.
using LossBuilder = std::function<Var(Graph<double>&, ParamBinder<double>&)>;

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst_param;
  int worst_coord = -1;
  int coords_checked = 0;
};

// Central-difference gradient check in float64. For every parameter, every
// coordinate is probed unless the parameter exceeds `coords_per_param`, in
// which case a deterministic random subset of that size is probed. Relative
// error uses max(|analytic|, |numeric|, 1e-8) as denominator.
//
// `per_parameter_vector` switches the comparison from per-coordinate to a
// per-parameter vector norm: ||a - n|| / max(||a||, ||n||, 1e-8) over the
// probed coordinates of each parameter. Whole-network losses need this form:
// a deep net always has a few coordinates whose true gradient influence on
// the loss sits below the double-precision ulp of the loss value, where a
// per-coordinate quotient measures only rounding noise.
GradCheckResult grad_check(const LossBuilder& build, ParamStore<double>& store,
                           double eps = 1e-6, int coords_per_param = 0,
                           std::uint64_t sample_seed = 7,
                           bool per_parameter_vector = false);

}  // namespace lhmp::ad
