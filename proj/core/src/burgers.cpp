#include "romforge/burgers.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "romforge/errors.hpp"

namespace romforge {

void BurgersConfig::validate() const {
  if (!(b > a)) throw config_error("burgers: domain needs b > a");
  if (n_nodes < 2) throw config_error("burgers: need at least 2 nodes");
  if (!(dt > 0.0)) throw config_error("burgers: dt must be positive");
  if (!(t_end >= dt)) throw config_error("burgers: t_end must be >= dt");
}

std::vector<double> burgers_step(const std::vector<double>& w,
                                 const BurgersConfig& cfg) {
  if (w.size() != cfg.n_nodes) throw shape_error("burgers_step: state length");
  const double dx = cfg.dx();
  const double flux = cfg.dt / (2.0 * dx);
  std::vector<double> out(w.size());
  out[0] = cfg.mu1;
  for (std::size_t i = 1; i < w.size(); ++i) {
    const double x_i = cfg.a + double(i) * dx;
    out[i] = w[i] - flux * (w[i] * w[i] - w[i - 1] * w[i - 1]) +
             cfg.dt * cfg.source_coeff * std::exp(cfg.mu2 * x_i);
  }
  return out;
}

Trajectory solve_burgers(const BurgersConfig& cfg, std::size_t sample_every) {
  cfg.validate();
  if (sample_every == 0) throw config_error("solve_burgers: sample_every >= 1");
  const auto steps = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));

  std::vector<double> w(cfg.n_nodes, 1.0);
  w[0] = cfg.mu1;

  const std::size_t stored = 1 + steps / sample_every;
  Trajectory traj{std::vector<double>(), DenseMatrix(stored, cfg.n_nodes)};
  traj.times.reserve(stored);
  std::size_t row = 0;
  auto store = [&](double t) {
    traj.times.push_back(t);
    std::copy(w.begin(), w.end(), traj.states.row(row++));
  };
  store(0.0);
  for (std::size_t k = 1; k <= steps; ++k) {
    w = burgers_step(w, cfg);
    for (double v : w)
      if (!std::isfinite(v))
        throw divergence_error("burgers blow-up at step " + std::to_string(k));
    if (k % sample_every == 0) store(double(k) * cfg.dt);
  }
  return traj;
}

std::vector<std::pair<double, double>> lattice_parameters(bool train) {
  std::vector<std::pair<double, double>> mus;
  if (train) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 4; ++j)
        mus.emplace_back(2.0 + 0.5 * i, 0.015 + 0.005 * j);
  } else {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 3; ++j)
        mus.emplace_back(2.25 + 0.5 * i, 0.0175 + 0.005 * j);
  }
  return mus;
}

int configured_threads() {
  const char* env = std::getenv("ROMFORGE_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n < 1 ? 1 : n;
}

SnapshotSet lattice_snapshots(bool train, const BurgersConfig& base,
                              bool include_t0, int threads) {
  base.validate();
  const auto mus = lattice_parameters(train);
  if (threads <= 0) threads = configured_threads();
  threads = int(std::min<std::size_t>(threads, mus.size()));

  std::vector<Trajectory> trajs(mus.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < mus.size(); i = next.fetch_add(1)) {
      BurgersConfig cfg = base;
      cfg.mu1 = mus[i].first;
      cfg.mu2 = mus[i].second;
      trajs[i] = solve_burgers(cfg, 1);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  const std::size_t per_traj = trajs[0].times.size() - (include_t0 ? 0 : 1);
  const std::size_t n_samples = per_traj * mus.size();
  SnapshotSet set{DenseMatrix(n_samples, 3),
                  Array::zeros({n_samples, base.n_nodes, 1})};
  set.role = train ? "train" : "validation";
  std::size_t row = 0;
  for (std::size_t m = 0; m < mus.size(); ++m) {
    const Trajectory& tr = trajs[m];
    for (std::size_t k = include_t0 ? 0 : 1; k < tr.times.size(); ++k) {
      set.params.at(row, 0) = tr.times[k];
      set.params.at(row, 1) = mus[m].first;
      set.params.at(row, 2) = mus[m].second;
      std::copy(tr.states.row(k), tr.states.row(k) + base.n_nodes,
                set.sample(row));
      ++row;
    }
  }
  return set;
}

}  // namespace romforge
