#include "lhmp/harness/train.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "lhmp/io/lhmp_file.hpp"
#include "lhmp/rng.hpp"

namespace lhmp::harness {

namespace {

// 90/10 split by sequence hash. If either side would be empty (tiny
// datasets), everything trains.
void split_samples(const std::vector<MotionSample>& samples, std::uint64_t seed,
                   std::vector<int>& train_idx, std::vector<int>& val_idx) {
  for (int i = 0; i < static_cast<int>(samples.size()); ++i) {
    bool val = derive_seed(seed, hash_str("split"), samples[i].sequence) % 10 == 0;
    (val ? val_idx : train_idx).push_back(i);
  }
  if (train_idx.empty() || val_idx.empty()) {
    train_idx.clear();
    val_idx.clear();
    for (int i = 0; i < static_cast<int>(samples.size()); ++i) train_idx.push_back(i);
  }
}

struct StepSlot {
  std::vector<std::vector<float>> grads;
  double loss = 0.0, l_init = 0.0, l_final = 0.0, l_cd = 0.0;
};

}  // namespace

TrainResult train(const SequenceStore& data, const TrainOptions& opts,
                  const Checkpoint* resume) {
  opts.config.validate();
  LHMP_CHECK(opts.batch >= 1, "train: batch must be >= 1");
  LHMP_CHECK(opts.epochs >= 1, "train: epochs must be >= 1");

  const model::ModelConfig& cfg = opts.config;
  model::Network<float> net(cfg);

  std::vector<MotionSample> samples =
      window_samples(data, cfg.t_obs, cfg.t_pred, opts.stride, cfg.n_points);
  LHMP_CHECK(!samples.empty(), "train: dataset yields no complete windows");

  std::vector<int> train_idx, val_idx;
  split_samples(samples, opts.seed, train_idx, val_idx);

  // Inputs are reused every epoch; build them once.
  std::vector<model::SampleInput<float>> inputs;
  inputs.reserve(samples.size());
  for (const auto& s : samples) inputs.push_back(to_sample_input<float>(s));

  TrainResult result;
  result.train_samples = static_cast<int>(train_idx.size());
  result.val_samples = static_cast<int>(val_idx.size());

  Checkpoint& ckpt = result.checkpoint;
  if (resume) {
    ckpt = *resume;
  } else {
    ckpt.config = cfg;
    ckpt.params = net.init_params(opts.seed);
    ckpt.adam = ad::AdamState<float>::init(ckpt.params);
    ckpt.seed = opts.seed;
    ckpt.epoch = 0;
  }
  ckpt.lr = opts.lr;
  ckpt.batch = opts.batch;
  ckpt.epochs = opts.epochs;
  ckpt.stride = opts.stride;
  ckpt.fps = data.fps;

  ad::AdamConfig adam_cfg;
  adam_cfg.lr = opts.lr;

  const int n_threads = worker_threads();
  bool done = false;
  for (int epoch = ckpt.epoch; epoch < opts.epochs && !done; ++epoch) {
    // Epoch-derived shuffle keeps resumed runs identical to uninterrupted ones.
    std::vector<int> order = train_idx;
    Rng shuffle_rng(derive_seed(opts.seed, hash_str("shuffle"), epoch));
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
      std::swap(order[i], order[shuffle_rng.uniform_index(i + 1)]);

    for (size_t chunk = 0; chunk < order.size(); chunk += opts.batch) {
      const int b = static_cast<int>(std::min<size_t>(opts.batch, order.size() - chunk));
      std::vector<StepSlot> slots(b);

      auto run_one = [&](int k) {
        const auto& input = inputs[order[chunk + k]];
        ad::Graph<float> g;
        ad::ParamBinder<float> bind(g, ckpt.params);
        model::LossNodes loss;
        if (cfg.m_hypotheses > 1) {
          auto wta = net.wta_loss(g, bind, input);
          loss = wta.loss;
        } else {
          auto fwd = net.forward(g, bind, input, 0);
          loss = net.build_losses(g, fwd, input);
        }
        g.backward(loss.total);
        slots[k].grads = ckpt.params.make_grad_buffers();
        bind.collect_grads(slots[k].grads);
        slots[k].loss = g.value(loss.total)[0];
        slots[k].l_init = g.value(loss.initial)[0];
        slots[k].l_final = g.value(loss.final_)[0];
        slots[k].l_cd = g.value(loss.points)[0];
      };

      const int workers = std::min(n_threads, b);
      if (workers <= 1) {
        for (int k = 0; k < b; ++k) run_one(k);
      } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t)
          pool.emplace_back([&, t]() {
            for (int k = t; k < b; k += workers) run_one(k);
          });
        for (auto& th : pool) th.join();
      }

      // Fixed-order reduction, then one optimizer step on the summed batch
      // gradient.
      auto grads = ckpt.params.make_grad_buffers();
      for (int k = 0; k < b; ++k)
        for (size_t p = 0; p < grads.size(); ++p)
          for (size_t j = 0; j < grads[p].size(); ++j) grads[p][j] += slots[k].grads[p][j];

      ad::adam_step(ckpt.params, grads, adam_cfg, ckpt.adam);

      CurvePoint pt;
      pt.step = ckpt.adam.step;
      pt.loss = pt.l_initial = pt.l_final = pt.l_cd = 0.0;
      for (int k = 0; k < b; ++k) {
        pt.loss += slots[k].loss / b;
        pt.l_initial += slots[k].l_init / b;
        pt.l_final += slots[k].l_final / b;
        pt.l_cd += slots[k].l_cd / b;
      }
      result.curve.push_back(pt);

      if (opts.max_steps > 0 && ckpt.adam.step >= opts.max_steps) {
        done = true;
        break;
      }
    }

    if (!done) ckpt.epoch = epoch + 1;  // a step-capped epoch stays incomplete
    if (!opts.checkpoint_dir.empty()) save_checkpoint(opts.checkpoint_dir, ckpt);
  }

  if (!opts.loss_csv.empty()) {
    std::ostringstream csv;
    csv << "step,loss,l_initial,l_final,l_cd\n";
    for (const auto& p : result.curve)
      csv << p.step << "," << p.loss << "," << p.l_initial << "," << p.l_final << ","
          << p.l_cd << "\n";
    io::atomic_write(opts.loss_csv, csv.str());
  }
  return result;
}

}  // namespace lhmp::harness
