#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "romforge/array.hpp"
#include "romforge/linalg.hpp"
#include "romforge/rng.hpp"

namespace romforge {

// A set of full-order samples: snaps[s] is an (n_nodes x n_features) state
// and params row s = (t, mu...) identifies where it was taken.
struct SnapshotSet {
  DenseMatrix params;  // n_samples x n_params
  Array snaps;         // shape {n_samples, n_nodes, n_features}
  std::string role = "train";

  std::size_t n_samples() const { return snaps.shape[0]; }
  std::size_t n_nodes() const { return snaps.shape[1]; }
  std::size_t n_features() const { return snaps.shape[2]; }
  std::size_t sample_size() const { return n_nodes() * n_features(); }
  const double* sample(std::size_t s) const {
    return snaps.data.data() + s * sample_size();
  }
  double* sample(std::size_t s) { return snaps.data.data() + s * sample_size(); }
  void validate() const;
};

// Column-wise extrema taken from the training set only.
struct NormStats {
  std::vector<double> m_min, m_max;  // per params column
  std::vector<double> s_min, s_max;  // per snaps entry (n_nodes*n_features)
};

struct Batch {
  DenseMatrix params;
  Array snaps;  // {n_b, n_nodes, n_features}
  std::size_t size() const { return snaps.shape[0]; }
};

NormStats fit_normalizer(const SnapshotSet& train);

// y = (x - min) / (max - min); entries with max == min map to 0.
SnapshotSet normalize(const SnapshotSet& x, const NormStats& stats);
SnapshotSet denormalize(const SnapshotSet& x, const NormStats& stats);

// In-place single-sample helpers used at evaluation time.
void normalize_sample(double* x, std::size_t n, const std::vector<double>& lo,
                      const std::vector<double>& hi);
void denormalize_sample(double* x, std::size_t n, const std::vector<double>& lo,
                        const std::vector<double>& hi);

// Shuffles sample order and partitions into ceil(n/n_b) batches; the last
// batch may be short.  Pairing of params and snaps rows is preserved.
std::vector<Batch> shuffle_batches(const SnapshotSet& set, std::size_t n_b,
                                   Xoshiro256ss& rng);

// Binary snapshot container (magic "SNP1", little-endian u64 dims
// n_samples/n_nodes/n_features/n_params, then params and snaps as f64).
void write_snapshots(const SnapshotSet& set, const std::string& path);
SnapshotSet read_snapshots(const std::string& path);

// CSV interchange: header row, one sample per row, params columns first.
void write_snapshots_csv(const SnapshotSet& set, const std::string& path);
SnapshotSet read_snapshots_csv(const std::string& path);

// Parameter pairs (ignoring the leading time column) present in both sets;
// empty means the split is sound.
std::vector<std::vector<double>> shared_parameters(const SnapshotSet& a,
                                                   const SnapshotSet& b);

}  // namespace romforge
