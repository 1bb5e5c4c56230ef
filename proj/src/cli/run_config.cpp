#include "lhmp/cli/run_config.hpp"

#include "lhmp/io/lhmp_file.hpp"

namespace lhmp::cli {

using nlohmann::json;

RunConfig RunConfig::from_preset(const std::string& name) {
  RunConfig c;
  c.preset = name;
  c.model = model::ModelConfig::preset(name);
  if (name == "paper") {
    c.lr = 1e-4;
    c.batch = 128;
    c.epochs = 100;
  }
  return c;
}

RunConfig RunConfig::from_json(const json& j) {
  LHMP_CONFIG_CHECK(j.is_object(), "run config must be a JSON object");
  static const char* known[] = {"t_obs",  "t_pred", "n_points",   "k_parts",
                                "d1",     "d2",     "heads",      "n_st_pairs",
                                "m_hypotheses",     "lr",         "batch",
                                "epochs", "seed",   "preset"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) ok = true;
    LHMP_CONFIG_CHECK(ok, "run config: unknown key '", it.key(), "'");
  }

  RunConfig c = from_preset(j.value("preset", "desk"));
  auto get_int = [&](const char* key, int& slot) {
    if (j.contains(key)) slot = j.at(key).get<int>();
  };
  get_int("t_obs", c.model.t_obs);
  get_int("t_pred", c.model.t_pred);
  get_int("n_points", c.model.n_points);
  get_int("k_parts", c.model.k_parts);
  get_int("d1", c.model.d1);
  get_int("d2", c.model.d2);
  get_int("heads", c.model.heads);
  get_int("n_st_pairs", c.model.n_st_pairs);
  get_int("m_hypotheses", c.model.m_hypotheses);
  if (j.contains("d1")) c.model.pointnet_widths.back() = c.model.d1;
  if (j.contains("lr")) c.lr = j.at("lr").get<double>();
  get_int("batch", c.batch);
  get_int("epochs", c.epochs);
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  c.model.validate();
  LHMP_CONFIG_CHECK(c.lr > 0.0, "run config: lr must be positive");
  LHMP_CONFIG_CHECK(c.batch >= 1 && c.epochs >= 1, "run config: batch/epochs must be >= 1");
  return c;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("run config " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace lhmp::cli
