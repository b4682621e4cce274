// Microbenchmarks for the hot paths: dense linear algebra, the SVD, the
// full-order solver, layer forwards, and one full training epoch.

#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "romforge/architectures.hpp"
#include "romforge/burgers.hpp"
#include "romforge/dataset.hpp"
#include "romforge/graph.hpp"
#include "romforge/linalg.hpp"
#include "romforge/network.hpp"
#include "romforge/pod.hpp"
#include "romforge/rng.hpp"
#include "romforge/train.hpp"

using namespace romforge;

namespace {

DenseMatrix random_matrix(std::size_t rows, std::size_t cols,
                          std::uint64_t seed) {
  Xoshiro256ss rng(seed);
  DenseMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m.at(r, c) = rng.uniform(-1.0, 1.0);
  return m;
}

void bm_matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix a = random_matrix(n, n, 1);
  const DenseMatrix b = random_matrix(n, n, 2);
  for (auto _ : state) {
    DenseMatrix c = matmul(a, b);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(int64_t(state.iterations()) * n * n * n);
}
BENCHMARK(bm_matmul)->Arg(64)->Arg(128)->Arg(256);

void bm_thin_svd(benchmark::State& state) {
  const auto cols = static_cast<std::size_t>(state.range(0));
  const DenseMatrix a = random_matrix(256, cols, 3);
  for (auto _ : state) {
    ThinSvd svd = thin_svd(a);
    benchmark::DoNotOptimize(svd.s.data());
  }
}
BENCHMARK(bm_thin_svd)->Arg(128)->Arg(600)->Unit(benchmark::kMillisecond);

void bm_burgers_step(benchmark::State& state) {
  BurgersConfig cfg;
  std::vector<double> w(cfg.n_nodes, 1.0);
  w[0] = cfg.mu1;
  for (auto _ : state) {
    w = burgers_step(w, cfg);
    benchmark::DoNotOptimize(w.data());
  }
}
BENCHMARK(bm_burgers_step);

void bm_burgers_solve(benchmark::State& state) {
  const BurgersConfig cfg;
  for (auto _ : state) {
    Trajectory t = solve_burgers(cfg);
    benchmark::DoNotOptimize(t.states.data());
  }
}
BENCHMARK(bm_burgers_solve)->Unit(benchmark::kMillisecond);

void bm_pod_fit(benchmark::State& state) {
  const BurgersConfig cfg;
  const SnapshotSet train = lattice_snapshots(true, cfg);
  for (auto _ : state) {
    PodBasis basis = pod_fit(train, 32, Centering::trajectory_ic);
    benchmark::DoNotOptimize(basis.u_n.data());
  }
  state.SetLabel("1200 snapshots of 256 nodes");
}
BENCHMARK(bm_pod_fit)->Unit(benchmark::kMillisecond);

void bm_galerkin_rhs(benchmark::State& state) {
  const BurgersConfig cfg;
  const SnapshotSet train = lattice_snapshots(true, cfg);
  const PodBasis basis = pod_fit(train, 10, Centering::trajectory_ic);
  const BurgersGalerkinRom rom = build_galerkin(basis, cfg);
  std::vector<double> w_hat(10, 0.1);
  for (auto _ : state) {
    std::vector<double> r = galerkin_rhs(rom, w_hat);
    benchmark::DoNotOptimize(r.data());
  }
}
BENCHMARK(bm_galerkin_rhs);

void bm_dense_forward(benchmark::State& state) {
  Xoshiro256ss rng(7);
  DenseLayer l = make_dense(256, 64, rng);
  Var x = Var::leaf({20, 256}, std::vector<double>(20 * 256, 0.3));
  for (auto _ : state) {
    Tape t;
    Var y = dense_forward(t, l, x);
    benchmark::DoNotOptimize(y.value().data());
  }
}
BENCHMARK(bm_dense_forward);

void bm_conv_forward(benchmark::State& state) {
  Xoshiro256ss rng(8);
  Conv2dLayer l = make_conv(8, 16, 16, 16, 5, 2, true, rng);
  Var x = Var::leaf({20, 8, 16, 16}, std::vector<double>(20 * 8 * 256, 0.3));
  for (auto _ : state) {
    Tape t;
    Var y = conv2d_forward(t, l, x);
    benchmark::DoNotOptimize(y.value().data());
  }
}
BENCHMARK(bm_conv_forward)->Unit(benchmark::kMillisecond);

void bm_gcn2_forward(benchmark::State& state) {
  Xoshiro256ss rng(9);
  const SparseProp prop = propagation_csr(path_graph(256));
  Gcn2Layer l = make_gcn2(1, 0.2, 0.5, rng);
  Var x = Var::leaf({20, 256, 1}, std::vector<double>(20 * 256, 0.3));
  for (auto _ : state) {
    Tape t;
    Var y = gcn2_forward(t, l, prop, x, x);
    benchmark::DoNotOptimize(y.value().data());
  }
}
BENCHMARK(bm_gcn2_forward);

void bm_train_epoch(benchmark::State& state) {
  const BurgersConfig base;
  const SnapshotSet train_set = lattice_snapshots(true, base);
  const SnapshotSet val_set = lattice_snapshots(false, base);
  const NormStats stats = fit_normalizer(train_set);
  const SnapshotSet norm_train = normalize(train_set, stats);
  const SnapshotSet norm_val = normalize(val_set, stats);
  ArchitectureSpec spec;
  spec.kind = ArchKind::fcnn;
  spec.latent = 32;
  spec.n_nodes = 256;
  for (auto _ : state) {
    state.PauseTiming();
    RomNetworks nets = build_architecture(spec, 1);
    TrainConfig cfg;
    cfg.lr = 5e-4;
    cfg.batch = 20;
    cfg.max_epochs = 1;
    cfg.early_stop = 10;
    cfg.mode = TrainMode::compression;
    state.ResumeTiming();
    TrainReport report = train(nets, norm_train, norm_val, cfg);
    benchmark::DoNotOptimize(report.train_loss.data());
  }
  state.SetLabel("fcnn n=32, 1200 samples, batch 20");
}
BENCHMARK(bm_train_epoch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
