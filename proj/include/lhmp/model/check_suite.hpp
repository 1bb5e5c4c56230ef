#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lhmp/model/network.hpp"

namespace lhmp::model {

struct CheckLine {
  std::string name;
  double max_rel_err = 0.0;
  int coords = 0;
};

// Finite-difference verification of every autodiff primitive (plus the
// attention and transformer-layer compositions) on seeded random instances.
std::vector<CheckLine> primitive_gradcheck_suite(std::uint64_t seed = 11,
                                                 int instances = 20);

// Micro network for the end-to-end check: T_o=2, T_p=2, N=16, d1=16, d2=8,
// heads=2, one ST/TT pair.
ModelConfig micro_config();

SampleInput<double> make_micro_sample(const ModelConfig& cfg, std::uint64_t seed);

// Central-difference check of d(total loss)/d(every parameter) through the
// whole pipeline in float64. coords_per_param = 0 probes every coordinate.
CheckLine model_gradcheck(std::uint64_t seed = 11, int coords_per_param = 0);

}  // namespace lhmp::model
