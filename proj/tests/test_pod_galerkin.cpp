#include <doctest.h>

#include <cmath>
#include <vector>

#include "romforge/burgers.hpp"
#include "romforge/errors.hpp"
#include "romforge/evaluate.hpp"
#include "romforge/pod.hpp"
#include "test_support.hpp"

using namespace romforge;
using testsupport::TempDir;

namespace {

// A snapshot set whose columns are the given samples; params rows carry
// (t, mu1, mu2) with mu1 defaulted to 1.
SnapshotSet set_from_samples(const std::vector<std::vector<double>>& samples,
                             double mu1 = 1.0) {
  SnapshotSet set;
  const std::size_t n = samples.size();
  const std::size_t len = samples[0].size();
  set.params = DenseMatrix(n, 3);
  set.snaps = Array::zeros({n, len, 1});
  for (std::size_t s = 0; s < n; ++s) {
    set.params.at(s, 0) = 0.1 * double(s + 1);
    set.params.at(s, 1) = mu1;
    set.params.at(s, 2) = 0.02;
    for (std::size_t i = 0; i < len; ++i) set.snaps.data[s * len + i] = samples[s][i];
  }
  return set;
}

// First difference operator of the upwind scheme: row 0 zero, then
// (w_j - w_{j-1}) / dx.
DenseMatrix dx_matrix(std::size_t n, double dx) {
  DenseMatrix d(n, n);
  for (std::size_t j = 1; j < n; ++j) {
    d.at(j, j) = 1.0 / dx;
    d.at(j, j - 1) = -1.0 / dx;
  }
  return d;
}

std::vector<double> masked_source(const BurgersConfig& cfg) {
  std::vector<double> src(cfg.n_nodes, 0.0);
  for (std::size_t i = 1; i < cfg.n_nodes; ++i)
    src[i] = cfg.source_coeff *
             std::exp(cfg.mu2 * (cfg.a + double(i) * cfg.dx()));
  return src;
}

PodBasis identity_basis(std::size_t n) {
  PodBasis basis;
  basis.centering = Centering::none;
  basis.u_n = DenseMatrix::identity(n);
  basis.singular_values.assign(n, 1.0);
  return basis;
}

}  // namespace

TEST_CASE("pod_fit on rank-one snapshots") {
  const SnapshotSet set = set_from_samples({{1.0, 1.0}, {2.0, 2.0}});
  const PodBasis basis = pod_fit(set, 1, Centering::none);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(basis.u_n.at(0, 0) == doctest::Approx(r).epsilon(1e-12));
  CHECK(basis.u_n.at(1, 0) == doctest::Approx(r).epsilon(1e-12));
  CHECK(basis.singular_values[0] ==
        doctest::Approx(std::sqrt(10.0)).epsilon(1e-12));
}

TEST_CASE("pod_fit validation") {
  const SnapshotSet set = set_from_samples({{1.0, 2.0}, {0.0, 1.0}});
  CHECK_THROWS_AS(pod_fit(set, 0, Centering::none), config_error);
  CHECK_THROWS_AS(pod_fit(set, 3, Centering::none), config_error);
}

TEST_CASE("full-rank pod reconstructs the training set") {
  Xoshiro256ss rng(8);
  const SnapshotSet set = testsupport::random_set(5, 8, 1, rng);
  const PodBasis basis = pod_fit(set, 5, Centering::none);
  const SnapshotSet recon = pod_compress(basis, set);
  CHECK(testsupport::max_abs_diff(recon.snaps.data, set.snaps.data) <= 1e-10);

  // Singular values are non-increasing.
  for (std::size_t c = 0; c + 1 < basis.singular_values.size(); ++c)
    CHECK(basis.singular_values[c] >= basis.singular_values[c + 1]);
}

TEST_CASE("pod errors shrink as the basis grows") {
  Xoshiro256ss rng(15);
  const SnapshotSet set = testsupport::random_set(6, 10, 1, rng);
  double prev = 1e18;
  for (std::size_t n = 1; n <= 6; ++n) {
    const PodBasis basis = pod_fit(set, n, Centering::none);
    const Metrics m = evaluate_pod(basis, set);
    CHECK(m.rl2_pct <= prev + 1e-9);
    prev = m.rl2_pct;
  }
}

TEST_CASE("compression is idempotent and fixes spanned states") {
  Xoshiro256ss rng(23);
  const SnapshotSet set = testsupport::random_set(6, 9, 1, rng);
  const PodBasis basis = pod_fit(set, 3, Centering::none);
  const SnapshotSet once = pod_compress(basis, set);
  const SnapshotSet twice = pod_compress(basis, once);
  CHECK(testsupport::max_abs_diff(once.snaps.data, twice.snaps.data) <= 1e-12);
}

TEST_CASE("an empty basis reproduces the center") {
  PodBasis basis;
  basis.u_n = DenseMatrix(4, 0);

  SUBCASE("no centering gives zeros") {
    basis.centering = Centering::none;
    const double params[3] = {0.1, 3.0, 0.02};
    const double x[4] = {9.0, 9.0, 9.0, 9.0};
    double out[4];
    pod_compress_sample(basis, params, 3, x, out);
    for (double v : out) CHECK(v == 0.0);
  }
  SUBCASE("trajectory centering gives the inflow initial state") {
    basis.centering = Centering::trajectory_ic;
    const double params[3] = {0.1, 3.0, 0.02};
    const double x[4] = {9.0, 9.0, 9.0, 9.0};
    double out[4];
    pod_compress_sample(basis, params, 3, x, out);
    CHECK(out[0] == 3.0);
    CHECK(out[1] == 1.0);
    CHECK(out[2] == 1.0);
    CHECK(out[3] == 1.0);
  }
}

TEST_CASE("trajectory centering subtracts the per-sample inflow state") {
  // One sample equal to its own center compresses to itself even with n=1.
  SnapshotSet set = set_from_samples({{3.0, 1.0, 1.0}, {3.0, 2.0, 1.0}}, 3.0);
  const PodBasis basis = pod_fit(set, 1, Centering::trajectory_ic);
  const SnapshotSet recon = pod_compress(basis, set);
  // The first sample is exactly the center: residual zero, reproduced.
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(recon.snaps.data[i] == doctest::Approx(set.snaps.data[i]).epsilon(1e-12));
}

TEST_CASE("pod basis file round trip") {
  TempDir tmp;
  Xoshiro256ss rng(31);
  const SnapshotSet set = testsupport::random_set(6, 7, 1, rng);
  const PodBasis basis = pod_fit(set, 4, Centering::trajectory_ic);
  const std::string path = tmp.file("b.pod");
  save_pod(basis, path);
  const PodBasis back = load_pod(path);
  CHECK(back.centering == basis.centering);
  CHECK(back.u_n.rows() == basis.u_n.rows());
  CHECK(back.u_n.data() == basis.u_n.data());
  CHECK(back.singular_values == basis.singular_values);
  CHECK_THROWS_AS(load_pod(tmp.file("missing.pod")), io_error);
}

TEST_CASE("galerkin operators match the independent projection oracle") {
  BurgersConfig cfg;
  cfg.a = 0.0;
  cfg.b = 8.0;
  cfg.n_nodes = 8;
  cfg.dt = 0.01;
  cfg.t_end = 0.05;
  cfg.mu1 = 2.0;
  cfg.mu2 = 0.015;

  Xoshiro256ss rng(40);
  const SnapshotSet set = testsupport::random_set(6, 8, 1, rng);
  const PodBasis basis = pod_fit(set, 4, Centering::none);
  const BurgersGalerkinRom rom = build_galerkin(basis, cfg);

  // Reference operators from explicit matrices.
  const DenseMatrix dxm = dx_matrix(8, cfg.dx());
  const DenseMatrix p_ref = matmul(basis.u_n.transposed(), dxm);
  const std::vector<double> w0 = inflow_initial_state(cfg.mu1, 8);
  std::vector<double> w0sq(8);
  for (int i = 0; i < 8; ++i) w0sq[i] = w0[i] * w0[i];
  const std::vector<double> a_ref = matvec(p_ref, w0sq);
  REQUIRE(rom.a_vec.size() == 4);
  CHECK(testsupport::max_abs_diff(rom.a_vec, a_ref) <= 1e-12);

  DenseMatrix diag_w0_u(8, 4);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 4; ++j) diag_w0_u.at(i, j) = w0[i] * basis.u_n.at(i, j);
  const DenseMatrix b_half = matmul(p_ref, diag_w0_u);
  for (int c = 0; c < 4; ++c)
    for (int j = 0; j < 4; ++j)
      CHECK(rom.b_mat.at(c, j) ==
            doctest::Approx(2.0 * b_half.at(c, j)).epsilon(1e-12));

  const std::vector<double> f_ref =
      matvec_transposed(basis.u_n, masked_source(cfg));
  CHECK(testsupport::max_abs_diff(rom.forcing, f_ref) <= 1e-13);

  // Full right-hand side against forcing - (a + B w + C(w,w))/2 where the
  // quadratic term is summed from the projected squared lifted state.
  const std::vector<double> w_hat = testsupport::random_vector(4, rng);
  const std::vector<double> lifted = matvec(basis.u_n, w_hat);
  std::vector<double> lifted_sq(8);
  for (int i = 0; i < 8; ++i) lifted_sq[i] = lifted[i] * lifted[i];
  const std::vector<double> c_ref = matvec(p_ref, lifted_sq);
  std::vector<double> rhs_ref(4);
  const std::vector<double> bw = matvec(rom.b_mat, w_hat);
  for (int c = 0; c < 4; ++c)
    rhs_ref[c] = f_ref[c] - 0.5 * (a_ref[c] + bw[c] + c_ref[c]);
  const std::vector<double> rhs = galerkin_rhs(rom, w_hat);
  CHECK(testsupport::max_abs_diff(rhs, rhs_ref) <= 1e-12);
}

TEST_CASE("zero expansion point kills the constant and linear terms") {
  BurgersConfig cfg;
  cfg.b = 8.0;
  cfg.n_nodes = 8;
  cfg.dt = 0.01;
  cfg.t_end = 0.05;
  Xoshiro256ss rng(41);
  const SnapshotSet set = testsupport::random_set(5, 8, 1, rng);
  const PodBasis basis = pod_fit(set, 3, Centering::none);
  const BurgersGalerkinRom rom =
      build_galerkin_at(basis, cfg, std::vector<double>(8, 0.0));
  for (double v : rom.a_vec) CHECK(v == 0.0);
  for (double v : rom.b_mat.data()) CHECK(v == 0.0);

  CHECK_THROWS_AS(
      build_galerkin_at(basis, cfg, std::vector<double>(5, 0.0)), shape_error);
}

TEST_CASE("materialized and factored quadratic terms agree") {
  BurgersConfig cfg;
  cfg.b = 16.0;
  cfg.n_nodes = 16;
  cfg.dt = 0.01;
  cfg.t_end = 0.05;
  Xoshiro256ss rng(42);
  const SnapshotSet set = testsupport::random_set(10, 16, 1, rng);
  const PodBasis basis = pod_fit(set, 6, Centering::none);
  const BurgersGalerkinRom tens = build_galerkin(basis, cfg, 64);
  const BurgersGalerkinRom fact = build_galerkin(basis, cfg, 0);
  CHECK_FALSE(tens.c_tens.empty());
  CHECK(fact.c_tens.empty());
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> w_hat = testsupport::random_vector(6, rng, -2.0, 2.0);
    const std::vector<double> r1 = galerkin_rhs(tens, w_hat);
    const std::vector<double> r2 = galerkin_rhs(fact, w_hat);
    const std::vector<double> r3 = galerkin_rhs_direct(tens, w_hat);
    CHECK(testsupport::max_abs_diff(r1, r2) <= 1e-12);
    CHECK(testsupport::max_abs_diff(r1, r3) <= 1e-10);
  }
}

TEST_CASE("galerkin step from rest moves by dt times the rhs") {
  BurgersConfig cfg;
  cfg.b = 8.0;
  cfg.n_nodes = 8;
  cfg.dt = 0.01;
  cfg.t_end = 0.05;
  Xoshiro256ss rng(43);
  const SnapshotSet set = testsupport::random_set(5, 8, 1, rng);
  const PodBasis basis = pod_fit(set, 3, Centering::none);
  const BurgersGalerkinRom rom = build_galerkin(basis, cfg);
  const std::vector<double> zero(3, 0.0);
  const std::vector<double> stepped = galerkin_step(rom, zero);
  std::vector<double> want(3);
  for (int c = 0; c < 3; ++c)
    want[c] = cfg.dt * (rom.forcing[c] - 0.5 * rom.a_vec[c]);
  CHECK(testsupport::max_abs_diff(stepped, want) <= 1e-15);
}

TEST_CASE("full identity basis reproduces the full-order solver") {
  BurgersConfig cfg;
  cfg.n_nodes = 32;
  cfg.t_end = 2.0;
  cfg.mu1 = 2.5;
  cfg.mu2 = 0.02;
  const PodBasis basis = identity_basis(32);
  const BurgersGalerkinRom rom = build_galerkin(basis, cfg, 64);
  const Trajectory rom_traj = galerkin_solve(rom);
  const Trajectory fom_traj = solve_burgers(cfg);
  REQUIRE(rom_traj.states.rows() == fom_traj.states.rows());
  CHECK(rom_traj.times == fom_traj.times);
  double scale = 0.0, diff = 0.0;
  for (std::size_t k = 0; k < fom_traj.states.rows(); ++k)
    for (std::size_t i = 0; i < 32; ++i) {
      scale = std::max(scale, std::abs(fom_traj.states.at(k, i)));
      diff = std::max(diff,
                      std::abs(fom_traj.states.at(k, i) - rom_traj.states.at(k, i)));
    }
  CHECK(diff <= 1e-8 * scale);
  // Boundary node is pinned on every reconstructed row.
  for (std::size_t k = 0; k < rom_traj.states.rows(); ++k)
    CHECK(rom_traj.states.at(k, 0) == cfg.mu1);
}

TEST_CASE("galerkin_predict aligns rows with the evaluation set") {
  BurgersConfig base;
  base.n_nodes = 32;
  base.b = 100.0;
  base.t_end = 1.0;
  const SnapshotSet train = lattice_snapshots(true, base);
  const SnapshotSet val = lattice_snapshots(false, base);
  const PodBasis basis = pod_fit(train, 8, Centering::trajectory_ic);
  const SnapshotSet pred = galerkin_predict(basis, base, val);
  CHECK(pred.snaps.shape == val.snaps.shape);
  CHECK(pred.params.data() == val.params.data());
  for (std::size_t s = 0; s < pred.n_samples(); ++s)
    CHECK(pred.sample(s)[0] == pred.params.at(s, 1));

  const Metrics m = evaluate_galerkin(basis, base, val);
  CHECK(m.method == "pod-galerkin");
  CHECK(m.latent == 8);
  CHECK(m.rl2_pct < 100.0);
  CHECK(m.rl2_pct >= 0.0);
}

TEST_CASE("evaluate_pod on a full-rank basis is numerically zero") {
  Xoshiro256ss rng(51);
  const SnapshotSet set = testsupport::random_set(6, 9, 1, rng);
  const PodBasis basis = pod_fit(set, 6, Centering::none);
  const Metrics m = evaluate_pod(basis, set);
  CHECK(m.rl1_pct <= 1e-8);
  CHECK(m.rl2_pct <= 1e-8);
  CHECK(m.method == "pod");
  CHECK(m.task == "compression");
  CHECK(m.model_bytes == 8 * (9 * 6 + 6));
}
