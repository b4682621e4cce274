#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "romforge/architectures.hpp"
#include "romforge/dataset.hpp"

namespace romforge {

// What the optimizer sees.  joint couples the autoencoder and the latent
// predictor through a two-term loss; compression trains the autoencoder
// alone; predictor fits the latent map against a frozen encoder (stage two
// of the split training variant).
enum class TrainMode { joint, compression, predictor };

std::string train_mode_name(TrainMode m);
TrainMode train_mode_from_name(const std::string& name);

struct TrainConfig {
  double lr = 1e-3;
  std::size_t batch = 20;        // n_b
  std::size_t early_stop = 200;  // c: consecutive non-improving epochs
  std::size_t max_epochs = 5000;
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::joint;
  double time_budget_s = 0.0;  // stop at the next epoch boundary; 0 = off

  void validate() const;
};

struct TrainReport {
  std::vector<double> train_loss;     // per epoch, sample-weighted batch mean
  std::vector<double> val_loss;       // per epoch, whole validation set
  std::vector<double> epoch_seconds;  // wall time per epoch
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;  // 1-based; 0 when no epoch improved
  std::size_t epochs = 0;
  std::string stopped_by;  // early_stop | max_epochs | time | divergence

  double median_epoch_seconds() const;  // NaN when no epochs ran
};

// Mean loss over one batch:
//   joint:       ||x - g(F(p))||^2 + ||h(x) - F(p)||^2
//   compression: ||x - g(h(x))||^2
//   predictor:   ||h(x) - F(p)||^2, encoder held in inference mode
// each summed over the batch and scaled by 1/batch_size.  Throws
// divergence_error when the result is not finite.
Var joint_loss(Tape& t, RomNetworks& nets, const Batch& batch, TrainMode mode,
               bool training);

// One early-stopping bookkeeping update.  A strict improvement over
// `best_val` records the new best and resets the stall counter; anything
// else increments it.  Returns true once `count` reaches `patience`.
bool early_stop_step(double val_loss, double& best_val, std::size_t& count,
                     std::size_t patience);

// Per epoch: shuffle the training set into batches, run backward + ADAM on
// each, then evaluate the same loss over the whole validation set with
// batchnorm in inference mode.  Stops after `early_stop` consecutive epochs
// without a new best validation loss, or at max_epochs, or when the time
// budget is spent.  The best-validation network state (including batchnorm
// running statistics) is restored at exit.  A non-finite loss or parameter
// aborts the run, keeps the best state seen, and marks the report.
TrainReport train(RomNetworks& nets, const SnapshotSet& train_set,
                  const SnapshotSet& val_set, const TrainConfig& cfg);

// One row per epoch: epoch,train_loss,val_loss,seconds.
void write_history_csv(const TrainReport& r, const std::string& path);

}  // namespace romforge
