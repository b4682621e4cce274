#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "romforge/linalg.hpp"

namespace romforge {

// Undirected weighted graph in CSR form with sorted column indices per row,
// so iteration order is deterministic.  Weights are nonnegative, the
// diagonal is empty, and w_ij = w_ji.
class Graph {
 public:
  Graph() = default;

  // Builds from an edge list; duplicate (i,j) entries are rejected, (j,i)
  // mirrors are implied and must not be listed twice with different weights.
  static Graph from_edges(std::size_t n_nodes,
                          const std::vector<std::array<double, 3>>& edges);

  std::size_t n_nodes() const { return n_nodes_; }
  std::size_t n_edges() const { return cols_.size() / 2; }
  double degree(std::size_t v) const { return degrees_[v]; }
  const std::vector<double>& degrees() const { return degrees_; }

  // CSR access: neighbors of v are cols_[row_ptr_[v] .. row_ptr_[v+1]).
  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& col_index() const { return cols_; }
  const std::vector<double>& weights() const { return weights_; }

  double weight(std::size_t i, std::size_t j) const;

 private:
  std::size_t n_nodes_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> cols_;
  std::vector<double> weights_;
  std::vector<double> degrees_;
};

// Chain 0-1-...-n-1 with unit weights; the mesh graph for 1-D problems.
Graph path_graph(std::size_t n);

// 4-neighbor lattice with unit weights, nodes indexed row-major.
Graph grid_graph(std::size_t rows, std::size_t cols);

// L = D - A, dense.  Rows sum to zero exactly for integer weights.
DenseMatrix combinatorial_laplacian(const Graph& g);

// P = (D+I)^{-1/2} (A+I) (D+I)^{-1/2}, dense.  Symmetric, entries in [0,1].
DenseMatrix propagation_matrix(const Graph& g);

// All nodes within shortest-path distance k of v, including v; sorted.
std::vector<std::size_t> k_hop_neighborhood(const Graph& g, std::size_t v,
                                            std::size_t k);

// Relabels nodes: edge (i,j) becomes (perm[i], perm[j]).
Graph permute(const Graph& g, const std::vector<std::size_t>& perm);

// Plain-text edge list: header line `nodes <n>`, then `i j w` per edge.
Graph read_graph(const std::string& path);
void write_graph(const Graph& g, const std::string& path);

}  // namespace romforge
