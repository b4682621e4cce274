#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "romforge/burgers.hpp"
#include "romforge/dataset.hpp"
#include "romforge/linalg.hpp"

namespace romforge {

// Reference state subtracted before the SVD.  trajectory_ic uses each
// sample's own initial condition (uniform 1 with the inflow value at node
// 0, reconstructed from the sample's mu1); none uses the raw snapshots.
enum class Centering { none, trajectory_ic };

struct PodBasis {
  DenseMatrix u_n;  // state_len x n, orthonormal columns
  std::vector<double> singular_values;  // leading n, descending
  Centering centering = Centering::none;

  std::size_t state_len() const { return u_n.rows(); }
  std::size_t n() const { return u_n.cols(); }
};

// The inflow-pinned uniform initial state of the 1-D problem.
std::vector<double> inflow_initial_state(double mu1, std::size_t len);

// Center for one sample given its parameter row (t, mu...).
std::vector<double> pod_center(const PodBasis& basis, const double* params,
                               std::size_t n_params);

PodBasis pod_fit(const SnapshotSet& train, std::size_t n, Centering centering);

// w_tilde = c + U_n U_n^T (w - c) per sample.
void pod_compress_sample(const PodBasis& basis, const double* params,
                         std::size_t n_params, const double* x, double* out);
SnapshotSet pod_compress(const PodBasis& basis, const SnapshotSet& set);

// Basis checkpoint: magic "POD1", little-endian u64 dims
// (state_len, n, centering), then singular values and the U_n blob as f64.
void save_pod(const PodBasis& basis, const std::string& path);
PodBasis load_pod(const std::string& path);

// Explicit Galerkin ROM of the upwind Burgers scheme.  The reduced state
// evolves as w_{k+1} = w_k + dt*(forcing - (a + B w + C(w,w))/2) with
// w_0 = 0, expanded around the inflow initial state.
struct BurgersGalerkinRom {
  PodBasis basis;
  BurgersConfig cfg;
  std::vector<double> w0;       // expansion point (length N)
  std::vector<double> a_vec;    // n
  DenseMatrix b_mat;            // n x n
  std::vector<double> c_tens;   // n^3 when materialized, empty otherwise
  std::vector<double> forcing;  // n, source projected with node 0 masked

  std::size_t n() const { return basis.n(); }
};

// Tensors are materialized for n <= max_tensor_n; larger bases evaluate
// the quadratic term in factored form (same values, linear memory).
BurgersGalerkinRom build_galerkin(const PodBasis& basis,
                                  const BurgersConfig& cfg,
                                  std::size_t max_tensor_n = 64);

// Same ROM expanded around an arbitrary point instead of the inflow
// initial state (the a and B terms are polynomial in w0).
BurgersGalerkinRom build_galerkin_at(const PodBasis& basis,
                                     const BurgersConfig& cfg,
                                     const std::vector<double>& w0,
                                     std::size_t max_tensor_n = 64);

// forcing - (a + B w + C(w,w))/2, the reduced right-hand side.
std::vector<double> galerkin_rhs(const BurgersGalerkinRom& rom,
                                 const std::vector<double>& w_hat);
// U_n^T applied to the full-order flux+source at w0 + U_n w_hat; the
// independent form the tensor evaluation must reproduce.
std::vector<double> galerkin_rhs_direct(const BurgersGalerkinRom& rom,
                                        const std::vector<double>& w_hat);

std::vector<double> galerkin_step(const BurgersGalerkinRom& rom,
                                  const std::vector<double>& w_hat);

// Integrates the reduced recursion and reconstructs full states
// (node 0 re-pinned to mu1); time grid matches the full-order solver.
Trajectory galerkin_solve(const BurgersGalerkinRom& rom,
                          std::size_t sample_every = 1);

// Reduced trajectories evaluated on a snapshot set's (t, mu) rows:
// returns reconstructions aligned row-for-row with `set`.
SnapshotSet galerkin_predict(const PodBasis& basis, const BurgersConfig& base,
                             const SnapshotSet& set);

}  // namespace romforge
