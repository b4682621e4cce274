#include "romforge/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "romforge/errors.hpp"

namespace romforge {

namespace {

Var batch_states(Tape& t, const Batch& b) {
  Var x = t.create({b.snaps.shape[0], b.snaps.shape[1], b.snaps.shape[2]});
  x.value() = b.snaps.data;
  return x;
}

Var batch_params(Tape& t, const Batch& b) {
  Var p = t.create({b.params.rows(), b.params.cols()});
  p.value() = b.params.data();
  return p;
}

Batch whole_set_batch(const SnapshotSet& s) {
  Batch b;
  b.params = s.params;
  b.snaps = s.snaps;
  return b;
}

std::vector<std::vector<double>> snapshot_state(const RomNetworks& nets) {
  std::vector<std::vector<double>> out;
  for (const Network* n : {&nets.encoder, &nets.decoder, &nets.predictor})
    for (auto& blob : n->save_state()) out.push_back(std::move(blob));
  return out;
}

void restore_state(RomNetworks& nets,
                   const std::vector<std::vector<double>>& state) {
  std::size_t at = 0;
  for (Network* n : {&nets.encoder, &nets.decoder, &nets.predictor}) {
    std::size_t count = n->save_state().size();
    n->load_state({state.begin() + at, state.begin() + at + count});
    at += count;
  }
}

std::vector<Var> trainable_parameters(RomNetworks& nets, TrainMode mode) {
  std::vector<Var> params;
  auto append = [&](const Network& n) {
    for (auto& v : n.parameters()) params.push_back(v);
  };
  if (mode != TrainMode::predictor) {
    append(nets.encoder);
    append(nets.decoder);
  }
  if (mode != TrainMode::compression) append(nets.predictor);
  return params;
}

}  // namespace

std::string train_mode_name(TrainMode m) {
  switch (m) {
    case TrainMode::joint: return "joint";
    case TrainMode::compression: return "compression";
    case TrainMode::predictor: return "predictor";
  }
  throw config_error("train_mode_name: bad mode");
}

TrainMode train_mode_from_name(const std::string& name) {
  if (name == "joint") return TrainMode::joint;
  if (name == "compression") return TrainMode::compression;
  if (name == "predictor") return TrainMode::predictor;
  throw config_error("unknown training mode: " + name);
}

void TrainConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr))
    throw config_error("TrainConfig: lr must be positive");
  if (batch == 0) throw config_error("TrainConfig: batch must be >= 1");
  if (early_stop == 0) throw config_error("TrainConfig: early_stop must be >= 1");
  if (max_epochs == 0) throw config_error("TrainConfig: max_epochs must be >= 1");
  if (time_budget_s < 0.0) throw config_error("TrainConfig: negative time budget");
}

double TrainReport::median_epoch_seconds() const {
  if (epoch_seconds.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> s = epoch_seconds;
  std::sort(s.begin(), s.end());
  std::size_t mid = s.size() / 2;
  if (s.size() % 2) return s[mid];
  return 0.5 * (s[mid - 1] + s[mid]);
}

Var joint_loss(Tape& t, RomNetworks& nets, const Batch& batch, TrainMode mode,
               bool training) {
  if (batch.size() == 0) throw config_error("joint_loss: empty batch");
  if (batch.params.rows() != batch.snaps.shape[0])
    throw shape_error("joint_loss: params/snaps row mismatch");

  Var x = batch_states(t, batch);
  Var loss;
  if (mode == TrainMode::compression) {
    Var z = nets.encoder.forward(t, x, training);
    Var xr = nets.decoder.forward(t, z, training);
    loss = sum_sq_diff(t, x, xr);
  } else {
    Var p = batch_params(t, batch);
    Var zp = nets.predictor.forward(t, p, training);
    bool enc_training = training && mode == TrainMode::joint;
    Var zx = nets.encoder.forward(t, x, enc_training);
    Var latent_fit = sum_sq_diff(t, zx, zp);
    if (mode == TrainMode::joint) {
      Var xr = nets.decoder.forward(t, zp, training);
      loss = add(t, sum_sq_diff(t, x, xr), latent_fit);
    } else {
      loss = latent_fit;
    }
  }
  loss = scale(t, loss, 1.0 / double(batch.size()));
  if (!std::isfinite(loss.value()[0]))
    throw divergence_error("joint_loss: non-finite loss");
  return loss;
}

TrainReport train(RomNetworks& nets, const SnapshotSet& train_set,
                  const SnapshotSet& val_set, const TrainConfig& cfg) {
  cfg.validate();
  train_set.validate();
  val_set.validate();
  if (train_set.n_nodes() != val_set.n_nodes() ||
      train_set.n_features() != val_set.n_features() ||
      train_set.params.cols() != val_set.params.cols())
    throw shape_error("train: training and validation sets disagree in shape");

  std::vector<Var> params = trainable_parameters(nets, cfg.mode);
  Adam opt(params, AdamConfig{cfg.lr, 0.9, 0.999, 1e-8});
  Xoshiro256ss rng(cfg.seed);
  const Batch val_batch = whole_set_batch(val_set);
  const double n_train = double(train_set.n_samples());

  TrainReport report;
  std::vector<std::vector<double>> best_state;
  std::size_t count = 0;
  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(clock::now() - t_start).count();
  };

  while (report.epochs < cfg.max_epochs) {
    if (cfg.time_budget_s > 0.0 && elapsed() >= cfg.time_budget_s) {
      report.stopped_by = "time";
      break;
    }
    const auto t_epoch = clock::now();
    double loss_sum = 0.0;
    try {
      for (const Batch& b : shuffle_batches(train_set, cfg.batch, rng)) {
        Tape tape;
        Var loss = joint_loss(tape, nets, b, cfg.mode, true);
        for (Var& p : params) p.zero_grad();
        tape.backward(loss);
        opt.step();
        loss_sum += loss.value()[0] * double(b.size());
      }
      Tape tape;
      Var vl = joint_loss(tape, nets, val_batch, cfg.mode, false);
      report.epochs += 1;
      report.train_loss.push_back(loss_sum / n_train);
      report.val_loss.push_back(vl.value()[0]);
      report.epoch_seconds.push_back(
          std::chrono::duration<double>(clock::now() - t_epoch).count());
    } catch (const divergence_error&) {
      report.stopped_by = "divergence";
      break;
    }
    const bool stall = early_stop_step(report.val_loss.back(),
                                       report.best_val, count, cfg.early_stop);
    if (count == 0) {
      report.best_epoch = report.epochs;
      best_state = snapshot_state(nets);
    }
    if (stall) {
      report.stopped_by = "early_stop";
      break;
    }
  }
  if (report.stopped_by.empty()) report.stopped_by = "max_epochs";
  if (!best_state.empty()) restore_state(nets, best_state);
  return report;
}

bool early_stop_step(double val_loss, double& best_val, std::size_t& count,
                     std::size_t patience) {
  if (val_loss < best_val) {
    best_val = val_loss;
    count = 0;
    return false;
  }
  ++count;
  return count >= patience;
}

void write_history_csv(const TrainReport& r, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw io_error("cannot write " + path);
  std::fprintf(f, "epoch,train_loss,val_loss,seconds\n");
  for (std::size_t e = 0; e < r.epochs; ++e)
    std::fprintf(f, "%zu,%.17g,%.17g,%.6f\n", e + 1, r.train_loss[e],
                 r.val_loss[e], r.epoch_seconds[e]);
  if (std::fclose(f) != 0) throw io_error("error closing " + path);
}

}  // namespace romforge
