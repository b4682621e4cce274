#include "romforge/graph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>

#include "romforge/errors.hpp"

namespace romforge {

Graph Graph::from_edges(std::size_t n_nodes,
                        const std::vector<std::array<double, 3>>& edges) {
  if (n_nodes == 0) throw config_error("graph: need at least one node");
  // Symmetrize through an ordered map so CSR rows come out sorted.
  std::map<std::pair<std::size_t, std::size_t>, double> adj;
  for (const auto& e : edges) {
    const double fi = e[0], fj = e[1], w = e[2];
    if (fi < 0 || fj < 0 || fi != std::floor(fi) || fj != std::floor(fj))
      throw config_error("graph: edge endpoints must be nonnegative integers");
    const auto i = static_cast<std::size_t>(fi);
    const auto j = static_cast<std::size_t>(fj);
    if (i >= n_nodes || j >= n_nodes)
      throw config_error("graph: edge endpoint out of range");
    if (i == j) throw config_error("graph: self-loops are not allowed");
    if (!(w >= 0.0) || !std::isfinite(w))
      throw config_error("graph: edge weights must be finite and nonnegative");
    auto lo = std::min(i, j), hi = std::max(i, j);
    auto [it, fresh] = adj.insert({{lo, hi}, w});
    if (!fresh && it->second != w)
      throw config_error("graph: conflicting duplicate edge weights");
  }
  Graph g;
  g.n_nodes_ = n_nodes;
  std::vector<std::map<std::size_t, double>> rows(n_nodes);
  for (const auto& [key, w] : adj) {
    rows[key.first][key.second] = w;
    rows[key.second][key.first] = w;
  }
  g.row_ptr_.assign(1, 0);
  g.degrees_.assign(n_nodes, 0.0);
  for (std::size_t v = 0; v < n_nodes; ++v) {
    for (const auto& [u, w] : rows[v]) {
      g.cols_.push_back(u);
      g.weights_.push_back(w);
      g.degrees_[v] += w;
    }
    g.row_ptr_.push_back(g.cols_.size());
  }
  return g;
}

double Graph::weight(std::size_t i, std::size_t j) const {
  if (i >= n_nodes_ || j >= n_nodes_)
    throw config_error("graph: node id out of range");
  for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
    if (cols_[k] == j) return weights_[k];
  return 0.0;
}

Graph path_graph(std::size_t n) {
  if (n == 0) throw config_error("path_graph: need at least one node");
  std::vector<std::array<double, 3>> edges;
  for (std::size_t i = 0; i + 1 < n; ++i)
    edges.push_back({double(i), double(i + 1), 1.0});
  return Graph::from_edges(n, edges);
}

Graph grid_graph(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw config_error("grid_graph: empty lattice");
  std::vector<std::array<double, 3>> edges;
  auto id = [cols](std::size_t r, std::size_t c) { return r * cols + c; };
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.push_back({double(id(r, c)), double(id(r, c + 1)), 1.0});
      if (r + 1 < rows) edges.push_back({double(id(r, c)), double(id(r + 1, c)), 1.0});
    }
  return Graph::from_edges(rows * cols, edges);
}

DenseMatrix combinatorial_laplacian(const Graph& g) {
  const std::size_t n = g.n_nodes();
  DenseMatrix l(n, n);
  for (std::size_t v = 0; v < n; ++v) {
    l.at(v, v) = g.degree(v);
    for (std::size_t k = g.row_ptr()[v]; k < g.row_ptr()[v + 1]; ++k)
      l.at(v, g.col_index()[k]) = -g.weights()[k];
  }
  return l;
}

DenseMatrix propagation_matrix(const Graph& g) {
  const std::size_t n = g.n_nodes();
  std::vector<double> dinv(n);
  for (std::size_t v = 0; v < n; ++v) dinv[v] = 1.0 / std::sqrt(g.degree(v) + 1.0);
  DenseMatrix p(n, n);
  for (std::size_t v = 0; v < n; ++v) {
    p.at(v, v) = dinv[v] * dinv[v];  // self-loop from A + I
    for (std::size_t k = g.row_ptr()[v]; k < g.row_ptr()[v + 1]; ++k) {
      const std::size_t u = g.col_index()[k];
      p.at(v, u) = dinv[v] * g.weights()[k] * dinv[u];
    }
  }
  return p;
}

std::vector<std::size_t> k_hop_neighborhood(const Graph& g, std::size_t v,
                                            std::size_t k) {
  if (v >= g.n_nodes()) throw config_error("k_hop_neighborhood: bad node id");
  std::vector<std::size_t> dist(g.n_nodes(), SIZE_MAX);
  std::deque<std::size_t> queue{v};
  dist[v] = 0;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    if (dist[u] == k) continue;
    for (std::size_t e = g.row_ptr()[u]; e < g.row_ptr()[u + 1]; ++e) {
      const std::size_t w = g.col_index()[e];
      if (dist[w] == SIZE_MAX) {
        dist[w] = dist[u] + 1;
        queue.push_back(w);
      }
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t u = 0; u < g.n_nodes(); ++u)
    if (dist[u] <= k) out.push_back(u);
  return out;
}

Graph permute(const Graph& g, const std::vector<std::size_t>& perm) {
  if (perm.size() != g.n_nodes())
    throw config_error("permute: permutation length mismatch");
  std::vector<bool> seen(g.n_nodes(), false);
  for (std::size_t p : perm) {
    if (p >= g.n_nodes() || seen[p])
      throw config_error("permute: not a bijection on node ids");
    seen[p] = true;
  }
  std::vector<std::array<double, 3>> edges;
  for (std::size_t v = 0; v < g.n_nodes(); ++v)
    for (std::size_t k = g.row_ptr()[v]; k < g.row_ptr()[v + 1]; ++k) {
      const std::size_t u = g.col_index()[k];
      if (v < u)
        edges.push_back({double(perm[v]), double(perm[u]), g.weights()[k]});
    }
  return Graph::from_edges(g.n_nodes(), edges);
}

Graph read_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open graph file: " + path);
  std::string tag;
  std::size_t n = 0;
  if (!(in >> tag >> n) || tag != "nodes")
    throw io_error("graph file must start with 'nodes <n>': " + path);
  std::vector<std::array<double, 3>> edges;
  double i, j, w;
  while (in >> i >> j >> w) edges.push_back({i, j, w});
  if (!in.eof()) throw io_error("malformed edge line in graph file: " + path);
  return Graph::from_edges(n, edges);
}

void write_graph(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write graph file: " + path);
  out << "nodes " << g.n_nodes() << "\n";
  char buf[96];
  for (std::size_t v = 0; v < g.n_nodes(); ++v)
    for (std::size_t k = g.row_ptr()[v]; k < g.row_ptr()[v + 1]; ++k) {
      const std::size_t u = g.col_index()[k];
      if (v < u) {
        std::snprintf(buf, sizeof buf, "%zu %zu %.17g\n", v, u, g.weights()[k]);
        out << buf;
      }
    }
  if (!out) throw io_error("failed writing graph file: " + path);
}

}  // namespace romforge
