#include "lhmp/harness/checkpoint.hpp"

#include <cstring>

#include <json.hpp>

#include "lhmp/io/lhmp_file.hpp"
#include "lhmp/model/network.hpp"

namespace lhmp::harness {

using nlohmann::json;

namespace {

void append_blob(std::string& bin, json& tensors, const std::string& name,
                 const std::vector<int>& dims, const std::vector<float>& data) {
  json t;
  t["name"] = name;
  t["shape"] = dims;
  t["offset"] = bin.size();
  t["length"] = data.size() * sizeof(float);
  tensors.push_back(t);
  bin.append(reinterpret_cast<const char*>(data.data()), data.size() * sizeof(float));
}

void read_blob(const std::string& bin, const json& t, const std::string& expect_name,
               const std::vector<int>& expect_dims, std::vector<float>& out) {
  std::string name = t.at("name");
  if (name != expect_name)
    throw IoError("checkpoint corrupt: expected tensor '" + expect_name + "', found '" +
                  name + "'");
  std::vector<int> dims = t.at("shape").get<std::vector<int>>();
  if (dims != expect_dims) {
    std::string msg = "checkpoint shape mismatch for parameter '" + expect_name + "'";
    throw ContractError(msg);
  }
  size_t offset = t.at("offset");
  size_t length = t.at("length");
  if (offset + length > bin.size() || length != out.size() * sizeof(float))
    throw IoError("checkpoint corrupt: blob range for '" + expect_name +
                  "' exceeds params.bin");
  std::memcpy(out.data(), bin.data() + offset, length);
}

json config_to_json(const model::ModelConfig& c) {
  json j;
  j["t_obs"] = c.t_obs;
  j["t_pred"] = c.t_pred;
  j["n_points"] = c.n_points;
  j["k_parts"] = c.k_parts;
  j["d1"] = c.d1;
  j["d2"] = c.d2;
  j["heads"] = c.heads;
  j["n_st_pairs"] = c.n_st_pairs;
  j["m_hypotheses"] = c.m_hypotheses;
  j["pointnet_widths"] = c.pointnet_widths;
  return j;
}

model::ModelConfig config_from_json(const json& j) {
  model::ModelConfig c;
  c.t_obs = j.at("t_obs");
  c.t_pred = j.at("t_pred");
  c.n_points = j.at("n_points");
  c.k_parts = j.at("k_parts");
  c.d1 = j.at("d1");
  c.d2 = j.at("d2");
  c.heads = j.at("heads");
  c.n_st_pairs = j.at("n_st_pairs");
  c.m_hypotheses = j.at("m_hypotheses");
  c.pointnet_widths = j.at("pointnet_widths").get<std::vector<int>>();
  c.validate();
  return c;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create checkpoint directory " + dir.string());

  json manifest;
  manifest["format"] = "lhmp-checkpoint";
  manifest["version"] = 1;
  manifest["config"] = config_to_json(ckpt.config);
  manifest["train"] = {{"lr", ckpt.lr},
                       {"batch", ckpt.batch},
                       {"epochs", ckpt.epochs},
                       {"stride", ckpt.stride},
                       {"epoch", ckpt.epoch},
                       {"fps", ckpt.fps},
                       {"adam_step", ckpt.adam.step},
                       {"seed", std::to_string(ckpt.seed)}};

  std::string bin;
  json tensors = json::array();
  for (int i = 0; i < ckpt.params.count(); ++i) {
    const auto& e = ckpt.params.entry(i);
    append_blob(bin, tensors, "param:" + e.name, e.dims, e.value);
  }
  for (int i = 0; i < ckpt.params.count(); ++i) {
    const auto& e = ckpt.params.entry(i);
    append_blob(bin, tensors, "adam_m:" + e.name, e.dims, ckpt.adam.m[i]);
    append_blob(bin, tensors, "adam_v:" + e.name, e.dims, ckpt.adam.v[i]);
  }
  manifest["tensors"] = tensors;

  io::atomic_write(dir / "params.bin", bin);
  io::atomic_write(dir / "manifest.json", manifest.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  json manifest = json::parse(io::read_file(dir / "manifest.json"));
  if (manifest.value("format", "") != "lhmp-checkpoint")
    throw IoError("not a checkpoint directory: " + dir.string());
  std::string bin = io::read_file(dir / "params.bin");

  Checkpoint ckpt;
  ckpt.config = config_from_json(manifest.at("config"));
  const json& t = manifest.at("train");
  ckpt.lr = t.at("lr");
  ckpt.batch = t.at("batch");
  ckpt.epochs = t.at("epochs");
  ckpt.stride = t.at("stride");
  ckpt.epoch = t.at("epoch");
  ckpt.fps = t.at("fps");
  ckpt.seed = std::stoull(t.at("seed").get<std::string>());

  // Structure from the config, values from the blobs.
  model::Network<float> net(ckpt.config);
  ckpt.params = net.init_params(0);
  ckpt.adam = ad::AdamState<float>::init(ckpt.params);
  ckpt.adam.step = t.at("adam_step");

  const json& tensors = manifest.at("tensors");
  size_t expected = static_cast<size_t>(ckpt.params.count()) * 3;
  if (tensors.size() != expected)
    throw IoError("checkpoint corrupt: tensor count mismatch in " + dir.string());

  size_t ti = 0;
  for (int i = 0; i < ckpt.params.count(); ++i) {
    auto& e = ckpt.params.entry(i);
    read_blob(bin, tensors[ti++], "param:" + e.name, e.dims, e.value);
  }
  for (int i = 0; i < ckpt.params.count(); ++i) {
    const auto& e = ckpt.params.entry(i);
    read_blob(bin, tensors[ti++], "adam_m:" + e.name, e.dims, ckpt.adam.m[i]);
    read_blob(bin, tensors[ti++], "adam_v:" + e.name, e.dims, ckpt.adam.v[i]);
  }
  return ckpt;
}

}  // namespace lhmp::harness
