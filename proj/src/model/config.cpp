#include "lhmp/model/config.hpp"

namespace lhmp::model {

void ModelConfig::validate() const {
  LHMP_CONFIG_CHECK(t_obs >= 1, "config: t_obs must be >= 1");
  LHMP_CONFIG_CHECK(t_pred >= 1, "config: t_pred must be >= 1");
  LHMP_CONFIG_CHECK(n_points >= 1, "config: n_points must be >= 1");
  LHMP_CONFIG_CHECK(k_parts >= 1, "config: k_parts must be >= 1");
  LHMP_CONFIG_CHECK(heads >= 1, "config: heads must be >= 1");
  LHMP_CONFIG_CHECK(d1 % heads == 0, "config: d1=", d1, " not divisible by heads=", heads);
  LHMP_CONFIG_CHECK(d2 % heads == 0, "config: d2=", d2, " not divisible by heads=", heads);
  LHMP_CONFIG_CHECK(n_st_pairs >= 1, "config: n_st_pairs must be >= 1");
  LHMP_CONFIG_CHECK(m_hypotheses >= 1, "config: m_hypotheses must be >= 1");
  LHMP_CONFIG_CHECK(!pointnet_widths.empty() && pointnet_widths.back() == d1,
                    "config: pointnet_widths must end in d1");
}

ModelConfig ModelConfig::desk() { return ModelConfig{}; }

ModelConfig ModelConfig::paper() {
  ModelConfig c;
  c.d1 = 1024;
  c.d2 = 512;
  c.heads = 8;
  c.pointnet_widths = {64, 128, 1024};
  return c;
}

ModelConfig ModelConfig::preset(const std::string& name) {
  if (name == "desk") return desk();
  if (name == "paper") return paper();
  throw ConfigError("unknown preset: " + name + " (expected desk or paper)");
}

}  // namespace lhmp::model
