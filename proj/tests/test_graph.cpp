#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "romforge/errors.hpp"
#include "romforge/graph.hpp"
#include "romforge/rng.hpp"
#include "test_support.hpp"

using namespace romforge;

TEST_CASE("path_graph basics") {
  const Graph g1 = path_graph(1);
  CHECK(g1.n_nodes() == 1);
  CHECK(g1.n_edges() == 0);
  CHECK(g1.degree(0) == 0.0);

  const Graph g2 = path_graph(2);
  CHECK(g2.n_edges() == 1);
  CHECK(g2.degree(0) == 1.0);
  CHECK(g2.degree(1) == 1.0);
  CHECK(g2.weight(0, 1) == 1.0);

  const Graph g4 = path_graph(4);
  CHECK(g4.n_edges() == 3);
  CHECK(g4.degrees() == std::vector<double>{1.0, 2.0, 2.0, 1.0});

  CHECK_THROWS_AS(path_graph(0), config_error);
}

TEST_CASE("grid_graph degrees") {
  const Graph g = grid_graph(2, 3);  // 6 nodes, 7 edges
  CHECK(g.n_nodes() == 6);
  CHECK(g.n_edges() == 7);
  CHECK(g.degree(0) == 2.0);  // corner
  CHECK(g.degree(1) == 3.0);  // edge midpoint
}

TEST_CASE("from_edges validation") {
  using E = std::vector<std::array<double, 3>>;
  CHECK_THROWS_AS(Graph::from_edges(0, E{}), config_error);
  CHECK_THROWS_AS(Graph::from_edges(3, E{{0, 0, 1.0}}), config_error);
  CHECK_THROWS_AS(Graph::from_edges(3, E{{0, 5, 1.0}}), config_error);
  CHECK_THROWS_AS(Graph::from_edges(3, E{{0, 1, -2.0}}), config_error);
  CHECK_THROWS_AS(Graph::from_edges(3, E{{0, 1, 1.0}, {1, 0, 2.0}}),
                  config_error);
  const Graph g = Graph::from_edges(3, E{{0, 1, 2.0}, {2, 1, 0.5}});
  CHECK(g.weight(0, 1) == 2.0);
  CHECK(g.weight(1, 0) == 2.0);
  CHECK(g.weight(1, 2) == 0.5);
  CHECK(g.weight(0, 2) == 0.0);
  CHECK(g.degree(1) == 2.5);
}

TEST_CASE("combinatorial laplacian") {
  const DenseMatrix l1 = combinatorial_laplacian(path_graph(1));
  CHECK(l1.at(0, 0) == 0.0);

  const DenseMatrix l2 = combinatorial_laplacian(path_graph(2));
  CHECK(l2.at(0, 0) == 1.0);
  CHECK(l2.at(0, 1) == -1.0);
  CHECK(l2.at(1, 0) == -1.0);
  CHECK(l2.at(1, 1) == 1.0);

  // Exactly zero row sums and positive semidefiniteness on a mixed graph.
  const Graph g = Graph::from_edges(
      5, {{0, 1, 1.0}, {1, 2, 2.0}, {2, 3, 1.0}, {3, 4, 3.0}, {0, 4, 1.0}});
  const DenseMatrix l = combinatorial_laplacian(g);
  for (std::size_t i = 0; i < 5; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < 5; ++j) row += l.at(i, j);
    CHECK(row == 0.0);
  }
  Xoshiro256ss rng(3);
  for (int k = 0; k < 100; ++k) {
    const std::vector<double> x = testsupport::random_vector(5, rng, -2.0, 2.0);
    const std::vector<double> lx = matvec(l, x);
    const double quad = std::inner_product(x.begin(), x.end(), lx.begin(), 0.0);
    CHECK(quad >= -1e-12);
  }
}

TEST_CASE("propagation matrix") {
  const DenseMatrix p1 = propagation_matrix(path_graph(1));
  CHECK(p1.at(0, 0) == 1.0);

  const DenseMatrix p2 = propagation_matrix(path_graph(2));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(p2.at(i, j) == doctest::Approx(0.5).epsilon(1e-15));

  const Graph g4 = path_graph(4);
  const DenseMatrix p4 = propagation_matrix(g4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(p4.at(i, j) >= 0.0);
      CHECK(p4.at(i, j) <= 1.0);
      CHECK(p4.at(i, j) == p4.at(j, i));
    }
  // v_i = sqrt(1 + deg_i) is an exact eigenvector with eigenvalue 1:
  // P v = (D+I)^{-1/2} (A+I) 1 = (D+I)^{-1/2} (deg+1) 1 = v.
  for (std::size_t i = 0; i < 4; ++i) {
    double pv = 0.0;
    for (std::size_t j = 0; j < 4; ++j)
      pv += p4.at(i, j) * std::sqrt(1.0 + g4.degree(j));
    CHECK(pv == doctest::Approx(std::sqrt(1.0 + g4.degree(i))).epsilon(1e-14));
  }
}

TEST_CASE("k-hop neighborhoods") {
  const Graph g = path_graph(4);
  CHECK(k_hop_neighborhood(g, 2, 0) == std::vector<std::size_t>{2});
  CHECK(k_hop_neighborhood(g, 0, 1) == std::vector<std::size_t>{0, 1});
  CHECK(k_hop_neighborhood(g, 1, 2) == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK_THROWS_AS(k_hop_neighborhood(g, 9, 1), config_error);
}

TEST_CASE("permute relabels edges") {
  const Graph g = path_graph(3);  // edges (0,1),(1,2)
  const Graph r = permute(g, {2, 1, 0});
  // Reversing a path gives the same adjacency.
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(r.weight(i, j) == g.weight(i, j));

  const Graph s = permute(g, {1, 2, 0});  // edges (1,2),(2,0)
  CHECK(s.weight(1, 2) == 1.0);
  CHECK(s.weight(0, 2) == 1.0);
  CHECK(s.weight(0, 1) == 0.0);
  CHECK(s.degree(2) == 2.0);

  CHECK_THROWS_AS(permute(g, {0, 0, 1}), config_error);
  CHECK_THROWS_AS(permute(g, {0, 1}), config_error);
}

TEST_CASE("propagation commutes with permutation") {
  Xoshiro256ss rng(17);
  const Graph g = grid_graph(3, 4);
  const DenseMatrix p = propagation_matrix(g);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::size_t> perm(g.n_nodes());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    const DenseMatrix pp = propagation_matrix(permute(g, perm));
    for (std::size_t i = 0; i < g.n_nodes(); ++i)
      for (std::size_t j = 0; j < g.n_nodes(); ++j)
        CHECK(std::abs(pp.at(perm[i], perm[j]) - p.at(i, j)) <= 1e-14);
  }
}

TEST_CASE("graph file round trip") {
  testsupport::TempDir tmp;
  const Graph g = Graph::from_edges(
      4, {{0, 1, 1.5}, {1, 2, 0.25}, {0, 3, 2.0}});
  const std::string path = tmp.file("g.txt");
  write_graph(g, path);
  const Graph h = read_graph(path);
  CHECK(h.n_nodes() == g.n_nodes());
  CHECK(h.n_edges() == g.n_edges());
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(h.weight(i, j) == g.weight(i, j));

  CHECK_THROWS_AS(read_graph(tmp.file("missing.txt")), io_error);
}
