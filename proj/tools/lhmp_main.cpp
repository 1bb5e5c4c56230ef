#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lhmp/cli/run_config.hpp"
#include "lhmp/harness/eval.hpp"
#include "lhmp/harness/train.hpp"
#include "lhmp/io/lhmp_file.hpp"
#include "lhmp/model/check_suite.hpp"
#include "lhmp/sim/dataset.hpp"

namespace {

using nlohmann::json;

int cmd_synth(const std::string& out, int seqs, int frames, std::uint64_t seed,
              double noise_ratio, double occl_ratio, double dist_min, double dist_max,
              double fps, const std::string& scan_preset) {
  lhmp::sim::SynthParams p;
  p.n_sequences = seqs;
  p.frames_per_sequence = frames;
  p.seed = seed;
  p.noise_frame_ratio = noise_ratio;
  p.occl_frame_ratio = occl_ratio;
  p.dist_min = dist_min;
  p.dist_max = dist_max;
  p.fps = fps;
  if (scan_preset == "paper") {
    p.scan.n_azimuth = 2048;
    p.scan.n_elevation = 128;
  } else if (scan_preset != "desk") {
    throw lhmp::ConfigError("unknown scan preset: " + scan_preset);
  }
  lhmp::sim::synth_dataset(out, p);
  std::cout << "wrote " << seqs << " sequences (" << frames << " frames each) to " << out
            << "\n";
  return 0;
}

int cmd_train(const std::string& data_dir, const std::string& config_path,
              const std::string& out_ckpt, const std::string& resume_path,
              const std::string& loss_csv) {
  lhmp::cli::RunConfig rc = config_path.empty()
                                ? lhmp::cli::RunConfig::from_preset("desk")
                                : lhmp::cli::RunConfig::from_file(config_path);
  auto data = lhmp::harness::load_dataset(data_dir);

  lhmp::harness::TrainOptions opts;
  opts.config = rc.model;
  opts.lr = rc.lr;
  opts.batch = rc.batch;
  opts.epochs = rc.epochs;
  opts.seed = rc.seed;
  opts.checkpoint_dir = out_ckpt;
  if (!loss_csv.empty()) opts.loss_csv = loss_csv;

  std::optional<lhmp::harness::Checkpoint> resume;
  if (!resume_path.empty()) resume = lhmp::harness::load_checkpoint(resume_path);

  auto result = lhmp::harness::train(data, opts, resume ? &*resume : nullptr);
  std::cout << "trained " << result.checkpoint.epoch << " epochs ("
            << result.checkpoint.adam.step << " steps, " << result.train_samples
            << " train samples); checkpoint at " << out_ckpt << "\n";
  if (!result.curve.empty())
    std::cout << "final loss " << result.curve.back().loss << "\n";
  return 0;
}

int cmd_eval(const std::string& data_dir, const std::string& ckpt_path,
             const std::string& report_path) {
  auto data = lhmp::harness::load_dataset(data_dir);
  auto ckpt = lhmp::harness::load_checkpoint(ckpt_path);
  auto report = lhmp::harness::evaluate(data, ckpt);
  json j = report.to_json();
  if (!report_path.empty()) lhmp::io::atomic_write(report_path, j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_predict(const std::string& data_dir, const std::string& ckpt_path, int sample,
                const std::string& out_path) {
  auto data = lhmp::harness::load_dataset(data_dir);
  auto ckpt = lhmp::harness::load_checkpoint(ckpt_path);
  auto pred = lhmp::harness::predict_sample(data, ckpt, sample);

  json j;
  j["sample"] = pred.sample_index;
  j["centroid"] = {pred.centroid.x, pred.centroid.y, pred.centroid.z};
  j["hypotheses"] = json::array();
  for (const auto& poses : pred.hypotheses_world) {
    json frames = json::array();
    for (const auto& pose : poses) {
      json joints = json::array();
      for (const auto& v : pose) joints.push_back({v.x, v.y, v.z});
      frames.push_back(joints);
    }
    j["hypotheses"].push_back(frames);
  }
  if (!out_path.empty()) lhmp::io::atomic_write(out_path, j.dump(2) + "\n");
  std::cout << "predicted sample " << sample << " with " << pred.hypotheses_world.size()
            << " hypothesis(es)";
  if (!out_path.empty()) std::cout << " -> " << out_path;
  std::cout << "\n";
  return 0;
}

int cmd_gradcheck(bool full) {
  constexpr double kPrimitiveTol = 1e-5;
  constexpr double kModelTol = 1e-4;
  bool ok = true;
  for (const auto& line : lhmp::model::primitive_gradcheck_suite()) {
    bool pass = line.max_rel_err <= kPrimitiveTol;
    ok = ok && pass;
    std::printf("%-24s max rel err %.3e over %d coords  [%s]\n", line.name.c_str(),
                line.max_rel_err, line.coords, pass ? "ok" : "FAIL");
  }
  if (full) {
    auto line = lhmp::model::model_gradcheck();
    bool pass = line.max_rel_err <= kModelTol;
    ok = ok && pass;
    std::printf("%-24s max rel err %.3e over %d coords  [%s]\n", line.name.c_str(),
                line.max_rel_err, line.coords, pass ? "ok" : "FAIL");
  }
  if (!ok) throw lhmp::ContractError("gradient check failed");
  return 0;
}

int cmd_sweep(const std::string& data_dir, const std::string& ckpt_path,
              const std::string& mode, const std::string& levels_csv,
              const std::string& report_path) {
  auto data = lhmp::harness::load_dataset(data_dir);
  auto ckpt = lhmp::harness::load_checkpoint(ckpt_path);

  std::vector<double> levels;
  std::string token;
  std::stringstream ss(levels_csv);
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) levels.push_back(std::stod(token));
  }
  auto result = lhmp::harness::robustness_sweep(data, ckpt, mode, levels);
  json j = result.to_json();
  if (!report_path.empty()) lhmp::io::atomic_write(report_path, j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LiDAR human motion prediction pipeline"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic labeled LiDAR dataset");
  std::string synth_out;
  int synth_seqs = 200, synth_frames = 14;
  std::uint64_t synth_seed = 1;
  double noise_ratio = 0.0, occl_ratio = 0.0, dist_min = 6.0, dist_max = 27.0, fps = 10.0;
  std::string scan_preset = "desk";
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--seqs", synth_seqs, "number of sequences");
  synth->add_option("--frames", synth_frames, "frames per sequence");
  synth->add_option("--seed", synth_seed, "root seed");
  synth->add_option("--noise-ratio", noise_ratio, "fraction of frames with noise points");
  synth->add_option("--occl-ratio", occl_ratio, "fraction of frames with an occlusion cutout");
  synth->add_option("--dist-min", dist_min, "minimum placement distance (m)");
  synth->add_option("--dist-max", dist_max, "maximum placement distance (m)");
  synth->add_option("--fps", fps, "frame rate");
  synth->add_option("--scan-preset", scan_preset, "beam grid: desk (512x64) or paper (2048x128)");

  // train
  auto* train = app.add_subcommand("train", "train a model");
  std::string train_data, train_config, train_out, train_resume, train_csv;
  train->add_option("--data", train_data, "dataset directory")->required();
  train->add_option("--config", train_config, "run config JSON");
  train->add_option("--out", train_out, "checkpoint directory")->required();
  train->add_option("--resume", train_resume, "checkpoint to resume from");
  train->add_option("--loss-csv", train_csv, "write the loss curve CSV here");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string eval_data, eval_ckpt, eval_report;
  eval->add_option("--data", eval_data, "dataset directory")->required();
  eval->add_option("--ckpt", eval_ckpt, "checkpoint directory")->required();
  eval->add_option("--report", eval_report, "report JSON path");

  // predict
  auto* predict = app.add_subcommand("predict", "emit predicted joints for one sample");
  std::string pred_data, pred_ckpt, pred_out;
  int pred_sample = 0;
  predict->add_option("--data", pred_data, "dataset directory")->required();
  predict->add_option("--ckpt", pred_ckpt, "checkpoint directory")->required();
  predict->add_option("--sample", pred_sample, "sample index")->required();
  predict->add_option("--out", pred_out, "output JSON path");

  // gradcheck
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient checks");
  bool gc_full = false;
  gradcheck->add_flag("--full", gc_full, "also check the end-to-end micro model");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "robustness sweep over augmentation levels");
  std::string sweep_data, sweep_ckpt, sweep_mode, sweep_levels = "0,20,40,80", sweep_report;
  sweep->add_option("--mode", sweep_mode, "occlusion | noise | distance")->required();
  sweep->add_option("--levels", sweep_levels, "comma-separated levels");
  sweep->add_option("--data", sweep_data, "dataset directory")->required();
  sweep->add_option("--ckpt", sweep_ckpt, "checkpoint directory")->required();
  sweep->add_option("--report", sweep_report, "report JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);  // prints help/usage
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed())
      return cmd_synth(synth_out, synth_seqs, synth_frames, synth_seed, noise_ratio,
                       occl_ratio, dist_min, dist_max, fps, scan_preset);
    if (train->parsed())
      return cmd_train(train_data, train_config, train_out, train_resume, train_csv);
    if (eval->parsed()) return cmd_eval(eval_data, eval_ckpt, eval_report);
    if (predict->parsed()) return cmd_predict(pred_data, pred_ckpt, pred_sample, pred_out);
    if (gradcheck->parsed()) return cmd_gradcheck(gc_full);
    if (sweep->parsed())
      return cmd_sweep(sweep_data, sweep_ckpt, sweep_mode, sweep_levels, sweep_report);
  } catch (const lhmp::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const lhmp::ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
