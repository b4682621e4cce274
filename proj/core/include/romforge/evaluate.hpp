#pragma once

#include <cstddef>
#include <string>

#include "romforge/architectures.hpp"
#include "romforge/dataset.hpp"
#include "romforge/pod.hpp"

namespace romforge {

enum class EvalTask { compression, prediction };

std::string eval_task_name(EvalTask t);
EvalTask eval_task_from_name(const std::string& name);

struct RelErrors {
  double rl1_pct = 0.0;
  double rl2_pct = 0.0;
};

// Empirical relative reconstruction errors, in percent:
//   Rl_i = 100 * sum_s ||x_s - y_s||_i / sum_s ||x_s||_i
// with norms over each flattened sample (leading dim indexes samples).
// Throws when shapes differ or the reference norms are zero.
RelErrors relative_errors(const Array& x, const Array& x_tilde);

struct Metrics {
  std::string method;
  std::string task;
  std::size_t latent = 0;
  double rl1_pct = 0.0;
  double rl2_pct = 0.0;
  std::size_t model_bytes = 0;     // stored parameter payload, 8 B per value
  double time_per_epoch_s = -1.0;  // < 0 or NaN -> "NA" in the CSV
};

// Reconstruct every sample of `set` (given in original units) through the
// trained networks: compression g(h(x)), prediction g(F(p)).  Inputs are
// normalized with `stats` and outputs denormalized before returning; the
// result carries the original params rows alongside the reconstructions.
SnapshotSet reconstruct_net(RomNetworks& nets, const SnapshotSet& set,
                            const NormStats& stats, EvalTask task);

// All metrics are computed against `set` in original (denormalized) units.
Metrics evaluate_net(RomNetworks& nets, const SnapshotSet& set,
                     const NormStats& stats, EvalTask task);
Metrics evaluate_pod(const PodBasis& basis, const SnapshotSet& set);
Metrics evaluate_galerkin(const PodBasis& basis, const BurgersConfig& base,
                          const SnapshotSet& set);

// One data row under the header
// method,task,n,rl1_pct,rl2_pct,size_kb,time_per_epoch_s.
void write_metrics_csv(const Metrics& m, const std::string& path);

}  // namespace romforge
