#include "lhmp/ad/adam.hpp"

#include <cmath>

namespace lhmp::ad {

template <class S>
void adam_step(ParamStore<S>& params, const std::vector<std::vector<S>>& grads,
               const AdamConfig& cfg, AdamState<S>& state) {
  LHMP_CHECK(static_cast<int>(grads.size()) == params.count(),
             "adam_step: gradient buffer count mismatch");
  LHMP_CHECK(static_cast<int>(state.m.size()) == params.count(),
             "adam_step: optimizer state mismatch");

  for (int i = 0; i < params.count(); ++i)
    for (S g : grads[i])
      if (!std::isfinite(static_cast<double>(g)))
        throw TrainingDivergence("non-finite gradient in parameter '" +
                                 params.entry(i).name + "'");

  state.step += 1;
  const double b1 = cfg.beta1, b2 = cfg.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));

  for (int i = 0; i < params.count(); ++i) {
    auto& value = params.entry(i).value;
    auto& m = state.m[i];
    auto& v = state.v[i];
    const auto& g = grads[i];
    LHMP_CHECK(g.size() == value.size(), "adam_step: gradient size mismatch for '",
               params.entry(i).name, "'");
    for (size_t j = 0; j < value.size(); ++j) {
      double gj = static_cast<double>(g[j]);
      double mj = b1 * static_cast<double>(m[j]) + (1.0 - b1) * gj;
      double vj = b2 * static_cast<double>(v[j]) + (1.0 - b2) * gj * gj;
      m[j] = static_cast<S>(mj);
      v[j] = static_cast<S>(vj);
      double m_hat = static_cast<double>(m[j]) / bc1;
      double v_hat = static_cast<double>(v[j]) / bc2;
      value[j] = static_cast<S>(static_cast<double>(value[j]) -
                                cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps));
    }
  }
}

template void adam_step<float>(ParamStore<float>&, const std::vector<std::vector<float>>&,
                               const AdamConfig&, AdamState<float>&);
template void adam_step<double>(ParamStore<double>&,
                                const std::vector<std::vector<double>>&, const AdamConfig&,
                                AdamState<double>&);

}  // namespace lhmp::ad
