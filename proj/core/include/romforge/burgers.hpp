#pragma once

#include <cstddef>
#include <vector>

#include "romforge/dataset.hpp"
#include "romforge/linalg.hpp"

namespace romforge {

// Inviscid Burgers problem on [a,b] with inflow boundary w(a)=mu1 and
// source 0.02*exp(mu2*x).  dx = (b-a)/n_nodes, x_i = a + i*dx.
struct BurgersConfig {
  double a = 0.0;
  double b = 100.0;
  std::size_t n_nodes = 256;
  double t_end = 10.0;
  double dt = 0.1;
  double mu1 = 2.0;
  double mu2 = 0.015;
  double source_coeff = 0.02;

  double dx() const { return (b - a) / double(n_nodes); }
  void validate() const;
};

struct Trajectory {
  std::vector<double> times;  // length K+1 including t=0
  DenseMatrix states;         // (K+1) x N
};

// One forward-Euler upwind step; node 0 is pinned to mu1.
std::vector<double> burgers_step(const std::vector<double>& w,
                                 const BurgersConfig& cfg);

// Integrates from w == 1 (node 0 overwritten to mu1) to t_end, storing
// every sample_every-th step plus the initial state.
Trajectory solve_burgers(const BurgersConfig& cfg, std::size_t sample_every = 1);

// Snapshot sets over the training lattice (12 parameter pairs) or the
// validation midpoints (6 pairs).  Each trajectory contributes the states
// at t = dt..t_end (t=0 excluded unless include_t0), with parameter rows
// (t, mu1, mu2).  Trajectories for distinct mu run on `threads` workers
// (<=0 means read ROMFORGE_THREADS, default 1); merge order is fixed.
SnapshotSet lattice_snapshots(bool train, const BurgersConfig& base,
                              bool include_t0 = false, int threads = 0);

// The mu pairs of the training lattice / validation midpoints, in order.
std::vector<std::pair<double, double>> lattice_parameters(bool train);

// Reads ROMFORGE_THREADS (default 1, clamped to >= 1).
int configured_threads();

}  // namespace romforge
