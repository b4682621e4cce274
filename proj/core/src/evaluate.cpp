#include "romforge/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "romforge/errors.hpp"

namespace romforge {

namespace {

std::size_t state_bytes(const Network& n) {
  std::size_t total = 0;
  for (const auto& blob : n.save_state()) total += blob.size();
  return 8 * total;
}

std::size_t pod_bytes(const PodBasis& basis) {
  return 8 * (basis.state_len() * basis.n() + basis.n());
}

}  // namespace

std::string eval_task_name(EvalTask t) {
  return t == EvalTask::compression ? "compression" : "prediction";
}

EvalTask eval_task_from_name(const std::string& name) {
  if (name == "compression") return EvalTask::compression;
  if (name == "prediction") return EvalTask::prediction;
  throw config_error("unknown evaluation task: " + name);
}

RelErrors relative_errors(const Array& x, const Array& x_tilde) {
  if (x.shape != x_tilde.shape)
    throw shape_error("relative_errors: shape mismatch");
  if (x.shape.empty() || x.shape[0] == 0)
    throw config_error("relative_errors: no samples");
  const std::size_t ns = x.shape[0];
  const std::size_t len = x.data.size() / ns;
  double num1 = 0.0, den1 = 0.0, num2 = 0.0, den2 = 0.0;
  for (std::size_t s = 0; s < ns; ++s) {
    const double* a = x.data.data() + s * len;
    const double* b = x_tilde.data.data() + s * len;
    double d1 = 0.0, r1 = 0.0, d2 = 0.0, r2 = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      const double diff = a[i] - b[i];
      d1 += std::abs(diff);
      r1 += std::abs(a[i]);
      d2 += diff * diff;
      r2 += a[i] * a[i];
    }
    num1 += d1;
    den1 += r1;
    num2 += std::sqrt(d2);
    den2 += std::sqrt(r2);
  }
  if (den1 == 0.0 || den2 == 0.0)
    throw config_error("relative_errors: zero reference norm");
  return {100.0 * num1 / den1, 100.0 * num2 / den2};
}

SnapshotSet reconstruct_net(RomNetworks& nets, const SnapshotSet& set,
                            const NormStats& stats, EvalTask task) {
  set.validate();
  if (set.n_nodes() != nets.spec.n_nodes ||
      set.n_features() != nets.spec.n_features)
    throw shape_error("reconstruct_net: sample shape does not match networks");
  if (task == EvalTask::prediction &&
      set.params.cols() != nets.spec.n_params)
    throw shape_error("reconstruct_net: parameter row width mismatch");

  const SnapshotSet norm = normalize(set, stats);
  SnapshotSet out = set;
  const std::size_t ns = set.n_samples();
  const std::size_t sample = set.sample_size();
  const std::size_t chunk = 512;
  for (std::size_t s0 = 0; s0 < ns; s0 += chunk) {
    const std::size_t bsz = std::min(chunk, ns - s0);
    Tape tape;
    Var z;
    if (task == EvalTask::compression) {
      Var x = tape.create({bsz, set.n_nodes(), set.n_features()});
      std::copy(norm.snaps.data.begin() + s0 * sample,
                norm.snaps.data.begin() + (s0 + bsz) * sample,
                x.value().begin());
      z = nets.encoder.forward(tape, x, false);
    } else {
      const std::size_t np = set.params.cols();
      Var p = tape.create({bsz, np});
      std::copy(norm.params.row(s0), norm.params.row(s0) + bsz * np,
                p.value().begin());
      z = nets.predictor.forward(tape, p, false);
    }
    Var xr = nets.decoder.forward(tape, z, false);
    if (xr.size() != bsz * sample)
      throw shape_error("reconstruct_net: decoder output size mismatch");
    std::copy(xr.value().begin(), xr.value().end(),
              out.snaps.data.begin() + s0 * sample);
  }
  for (std::size_t s = 0; s < ns; ++s)
    denormalize_sample(out.sample(s), sample, stats.s_min, stats.s_max);
  return out;
}

Metrics evaluate_net(RomNetworks& nets, const SnapshotSet& set,
                     const NormStats& stats, EvalTask task) {
  SnapshotSet recon = reconstruct_net(nets, set, stats, task);
  RelErrors err = relative_errors(set.snaps, recon.snaps);
  Metrics m;
  m.method = arch_name(nets.spec.kind);
  m.task = eval_task_name(task);
  m.latent = nets.spec.latent;
  m.rl1_pct = err.rl1_pct;
  m.rl2_pct = err.rl2_pct;
  m.model_bytes = state_bytes(nets.encoder) + state_bytes(nets.decoder) +
                  state_bytes(nets.predictor);
  return m;
}

Metrics evaluate_pod(const PodBasis& basis, const SnapshotSet& set) {
  SnapshotSet recon = pod_compress(basis, set);
  RelErrors err = relative_errors(set.snaps, recon.snaps);
  Metrics m;
  m.method = "pod";
  m.task = "compression";
  m.latent = basis.n();
  m.rl1_pct = err.rl1_pct;
  m.rl2_pct = err.rl2_pct;
  m.model_bytes = pod_bytes(basis);
  return m;
}

Metrics evaluate_galerkin(const PodBasis& basis, const BurgersConfig& base,
                          const SnapshotSet& set) {
  SnapshotSet recon = galerkin_predict(basis, base, set);
  RelErrors err = relative_errors(set.snaps, recon.snaps);
  Metrics m;
  m.method = "pod-galerkin";
  m.task = "prediction";
  m.latent = basis.n();
  m.rl1_pct = err.rl1_pct;
  m.rl2_pct = err.rl2_pct;
  m.model_bytes = pod_bytes(basis);
  return m;
}

void write_metrics_csv(const Metrics& m, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw io_error("cannot write " + path);
  std::fprintf(f, "method,task,n,rl1_pct,rl2_pct,size_kb,time_per_epoch_s\n");
  std::fprintf(f, "%s,%s,%zu,%.10g,%.10g,%.10g,", m.method.c_str(),
               m.task.c_str(), m.latent, m.rl1_pct, m.rl2_pct,
               double(m.model_bytes) / 1000.0);
  if (std::isfinite(m.time_per_epoch_s) && m.time_per_epoch_s >= 0.0)
    std::fprintf(f, "%.6f\n", m.time_per_epoch_s);
  else
    std::fprintf(f, "NA\n");
  if (std::fclose(f) != 0) throw io_error("error closing " + path);
}

}  // namespace romforge
