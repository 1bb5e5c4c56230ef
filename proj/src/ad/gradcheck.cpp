#include "lhmp/ad/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "lhmp/rng.hpp"

namespace lhmp::ad {

namespace {

double eval_loss(const LossBuilder& build, ParamStore<double>& store) {
  Graph<double> g;
  ParamBinder<double> bind(g, store);
  Var loss = build(g, bind);
  LHMP_CHECK(g.value(loss).size() == 1, "grad_check: loss must be scalar");
  return g.value(loss)[0];
}

}  // namespace

GradCheckResult grad_check(const LossBuilder& build, ParamStore<double>& store,
                           double eps, int coords_per_param, std::uint64_t sample_seed,
                           bool per_parameter_vector) {
  // Analytic gradients, one backward pass.
  auto grads = store.make_grad_buffers();
  {
    Graph<double> g;
    ParamBinder<double> bind(g, store);
    Var loss = build(g, bind);
    g.backward(loss);
    bind.collect_grads(grads);
  }

  GradCheckResult result;
  for (int p = 0; p < store.count(); ++p) {
    auto& value = store.entry(p).value;
    const int n = static_cast<int>(value.size());

    std::vector<int> coords;
    if (coords_per_param > 0 && n > coords_per_param) {
      Rng rng(derive_seed(sample_seed, hash_str(store.entry(p).name.c_str())));
      coords.resize(coords_per_param);
      for (int& c : coords) c = static_cast<int>(rng.uniform_index(n));
      std::sort(coords.begin(), coords.end());
      coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
    } else {
      coords.resize(n);
      for (int i = 0; i < n; ++i) coords[i] = i;
    }

    double sum_diff2 = 0.0, sum_a2 = 0.0, sum_n2 = 0.0;
    for (int c : coords) {
      const double saved = value[c];
      value[c] = saved + eps;
      double f_plus = eval_loss(build, store);
      value[c] = saved - eps;
      double f_minus = eval_loss(build, store);
      value[c] = saved;

      double numeric = (f_plus - f_minus) / (2.0 * eps);
      double analytic = grads[p][c];
      result.coords_checked += 1;
      if (per_parameter_vector) {
        sum_diff2 += (analytic - numeric) * (analytic - numeric);
        sum_a2 += analytic * analytic;
        sum_n2 += numeric * numeric;
        continue;
      }
      double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      double rel = std::abs(analytic - numeric) / denom;
      if (rel > result.max_rel_err) {
        result.max_rel_err = rel;
        result.worst_param = store.entry(p).name;
        result.worst_coord = c;
      }
    }
    if (per_parameter_vector) {
      double denom = std::max({std::sqrt(sum_a2), std::sqrt(sum_n2), 1e-8});
      double rel = std::sqrt(sum_diff2) / denom;
      if (rel > result.max_rel_err) {
        result.max_rel_err = rel;
        result.worst_param = store.entry(p).name;
        result.worst_coord = -1;
      }
    }
  }
  return result;
}

}  // namespace lhmp::ad
