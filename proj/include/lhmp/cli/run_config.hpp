#pragma once

#include <filesystem>

#include <json.hpp>

#include "lhmp/model/config.hpp"

namespace lhmp::cli {

// JSON run configuration. `preset` (desk | paper) expands all defaults first,
// then explicit keys override. Unknown keys are rejected.
struct RunConfig {
  model::ModelConfig model;
  double lr = 2e-3;
  int batch = 8;
  int epochs = 300;
  std::uint64_t seed = 1;
  std::string preset = "desk";

  static RunConfig from_preset(const std::string& name);
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::filesystem::path& path);
};

}  // namespace lhmp::cli
