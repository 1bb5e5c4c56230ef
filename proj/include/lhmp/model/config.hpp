#pragma once

#include <string>
#include <vector>

#include "lhmp/common.hpp"

namespace lhmp::model {

// Network hyperparameters. `desk` is small enough to train on a CPU in
// minutes; `paper` matches the published sizes (d1=1024, d2=512, K=9).
struct ModelConfig {
  int t_obs = 4;
  int t_pred = 4;
  int n_points = 256;
  int k_parts = 9;
  int d1 = 128;
  int d2 = 64;
  int heads = 4;
  int n_st_pairs = 2;
  int m_hypotheses = 1;
  std::vector<int> pointnet_widths{64, 128, 128};  // last entry must equal d1

  int t_total() const { return t_obs + t_pred; }
  int frame_tokens() const { return k_parts + 1; }    // global + K part tokens
  int stcr_tokens() const { return k_parts + 25; }    // 24 joints + K + 1 features
  void validate() const;

  static ModelConfig desk();
  static ModelConfig paper();
  static ModelConfig preset(const std::string& name);
};

}  // namespace lhmp::model
