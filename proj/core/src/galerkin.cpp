#include <cmath>

#include "romforge/errors.hpp"
#include "romforge/pod.hpp"

namespace romforge {

namespace {

// (D_x v)_0 = 0, (D_x v)_i = (v_i - v_{i-1})/dx: the forward-difference
// operator with its first row zeroed (the boundary node carries no flux).
std::vector<double> apply_dx(const std::vector<double>& v, double dx) {
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t i = 1; i < v.size(); ++i) out[i] = (v[i] - v[i - 1]) / dx;
  return out;
}

std::vector<double> source_vector(const BurgersConfig& cfg) {
  std::vector<double> src(cfg.n_nodes, 0.0);
  const double dx = cfg.dx();
  // Node 0 is pinned by the inflow condition and receives no source.
  for (std::size_t i = 1; i < cfg.n_nodes; ++i)
    src[i] = cfg.source_coeff * std::exp(cfg.mu2 * (cfg.a + double(i) * dx));
  return src;
}

}  // namespace

BurgersGalerkinRom build_galerkin(const PodBasis& basis,
                                  const BurgersConfig& cfg,
                                  std::size_t max_tensor_n) {
  return build_galerkin_at(basis, cfg,
                           inflow_initial_state(cfg.mu1, cfg.n_nodes),
                           max_tensor_n);
}

BurgersGalerkinRom build_galerkin_at(const PodBasis& basis,
                                     const BurgersConfig& cfg,
                                     const std::vector<double>& w0,
                                     std::size_t max_tensor_n) {
  cfg.validate();
  if (basis.state_len() != cfg.n_nodes)
    throw shape_error("build_galerkin: basis rows != n_nodes");
  if (w0.size() != cfg.n_nodes)
    throw shape_error("build_galerkin: expansion point length != n_nodes");
  const std::size_t n = basis.n();
  const std::size_t nn = cfg.n_nodes;
  const double dx = cfg.dx();

  BurgersGalerkinRom rom;
  rom.basis = basis;
  rom.cfg = cfg;
  rom.w0 = w0;

  // p = U_n^T D_x from the bidiagonal structure: column j of D_x holds
  // 1/dx at row j (for j >= 1) and -1/dx at row j+1, row 0 being zero.
  DenseMatrix p(n, nn);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t j = 0; j < nn; ++j) {
      double v = 0.0;
      if (j >= 1) v += basis.u_n.at(j, c) / dx;
      if (j + 1 < nn) v -= basis.u_n.at(j + 1, c) / dx;
      p.at(c, j) = v;
    }

  std::vector<double> w0sq(nn);
  for (std::size_t i = 0; i < nn; ++i) w0sq[i] = rom.w0[i] * rom.w0[i];
  rom.a_vec = matvec(p, w0sq);

  rom.b_mat = DenseMatrix(n, n);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < nn; ++i)
        acc += p.at(c, i) * rom.w0[i] * basis.u_n.at(i, j);
      rom.b_mat.at(c, j) = 2.0 * acc;
    }

  if (n <= max_tensor_n) {
    rom.c_tens.assign(n * n * n, 0.0);
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
          double acc = 0.0;
          for (std::size_t i = 0; i < nn; ++i)
            acc += p.at(c, i) * basis.u_n.at(i, j) * basis.u_n.at(i, k);
          rom.c_tens[(c * n + j) * n + k] = acc;
        }
  }

  rom.forcing = matvec_transposed(basis.u_n, source_vector(cfg));
  return rom;
}

std::vector<double> galerkin_rhs(const BurgersGalerkinRom& rom,
                                 const std::vector<double>& w_hat) {
  const std::size_t n = rom.n();
  if (w_hat.size() != n) throw shape_error("galerkin_rhs: state length");
  std::vector<double> quad(n, 0.0);
  if (!rom.c_tens.empty()) {
    for (std::size_t c = 0; c < n; ++c) {
      double acc = 0.0;
      const double* cc = rom.c_tens.data() + c * n * n;
      for (std::size_t j = 0; j < n; ++j) {
        const double wj = w_hat[j];
        if (wj == 0.0) continue;
        const double* cj = cc + j * n;
        double inner = 0.0;
        for (std::size_t k = 0; k < n; ++k) inner += cj[k] * w_hat[k];
        acc += wj * inner;
      }
      quad[c] = acc;
    }
  } else {
    // Factored evaluation of the same contraction: C(w,w) = p (U w)^2.
    const std::vector<double> y = matvec(rom.basis.u_n, w_hat);
    std::vector<double> ysq(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) ysq[i] = y[i] * y[i];
    const std::vector<double> dxy = apply_dx(ysq, rom.cfg.dx());
    quad = matvec_transposed(rom.basis.u_n, dxy);
  }
  const std::vector<double> bw = matvec(rom.b_mat, w_hat);
  std::vector<double> rhs(n);
  for (std::size_t c = 0; c < n; ++c)
    rhs[c] = rom.forcing[c] - 0.5 * (rom.a_vec[c] + bw[c] + quad[c]);
  return rhs;
}

std::vector<double> galerkin_rhs_direct(const BurgersGalerkinRom& rom,
                                        const std::vector<double>& w_hat) {
  const std::size_t nn = rom.cfg.n_nodes;
  const double dx = rom.cfg.dx();
  std::vector<double> w = matvec(rom.basis.u_n, w_hat);
  for (std::size_t i = 0; i < nn; ++i) w[i] += rom.w0[i];
  const std::vector<double> src = source_vector(rom.cfg);
  std::vector<double> f(nn, 0.0);
  for (std::size_t i = 1; i < nn; ++i)
    f[i] = -(w[i] * w[i] - w[i - 1] * w[i - 1]) / (2.0 * dx) + src[i];
  return matvec_transposed(rom.basis.u_n, f);
}

std::vector<double> galerkin_step(const BurgersGalerkinRom& rom,
                                  const std::vector<double>& w_hat) {
  const std::vector<double> rhs = galerkin_rhs(rom, w_hat);
  std::vector<double> next(w_hat.size());
  for (std::size_t c = 0; c < w_hat.size(); ++c) {
    next[c] = w_hat[c] + rom.cfg.dt * rhs[c];
    if (!std::isfinite(next[c]))
      throw divergence_error("galerkin blow-up in reduced state");
  }
  return next;
}

Trajectory galerkin_solve(const BurgersGalerkinRom& rom,
                          std::size_t sample_every) {
  if (sample_every == 0) throw config_error("galerkin_solve: sample_every >= 1");
  const auto steps =
      static_cast<std::size_t>(std::llround(rom.cfg.t_end / rom.cfg.dt));
  const std::size_t stored = 1 + steps / sample_every;
  Trajectory traj{std::vector<double>(), DenseMatrix(stored, rom.cfg.n_nodes)};
  traj.times.reserve(stored);

  std::vector<double> w_hat(rom.n(), 0.0);
  std::size_t row = 0;
  auto store = [&](double t) {
    std::vector<double> w = matvec(rom.basis.u_n, w_hat);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += rom.w0[i];
    w[0] = rom.cfg.mu1;  // boundary re-imposed after expansion
    traj.times.push_back(t);
    std::copy(w.begin(), w.end(), traj.states.row(row++));
  };
  store(0.0);
  for (std::size_t k = 1; k <= steps; ++k) {
    w_hat = galerkin_step(rom, w_hat);
    if (k % sample_every == 0) store(double(k) * rom.cfg.dt);
  }
  return traj;
}

SnapshotSet galerkin_predict(const PodBasis& basis, const BurgersConfig& base,
                             const SnapshotSet& set) {
  set.validate();
  if (set.params.cols() < 3)
    throw shape_error("galerkin_predict: parameter rows must be (t, mu1, mu2)");
  SnapshotSet out = set;

  // Group rows by mu and integrate each trajectory once.
  std::vector<std::size_t> order(set.n_samples());
  for (std::size_t s = 0; s < order.size(); ++s) order[s] = s;
  std::vector<bool> done(set.n_samples(), false);
  for (std::size_t s = 0; s < set.n_samples(); ++s) {
    if (done[s]) continue;
    const double mu1 = set.params.at(s, 1), mu2 = set.params.at(s, 2);
    BurgersConfig cfg = base;
    cfg.mu1 = mu1;
    cfg.mu2 = mu2;
    const BurgersGalerkinRom rom = build_galerkin(basis, cfg);
    const Trajectory traj = galerkin_solve(rom, 1);
    for (std::size_t r = s; r < set.n_samples(); ++r) {
      if (done[r] || set.params.at(r, 1) != mu1 || set.params.at(r, 2) != mu2)
        continue;
      const double t = set.params.at(r, 0);
      const auto k = static_cast<std::size_t>(std::llround(t / cfg.dt));
      if (k >= traj.times.size())
        throw config_error("galerkin_predict: sample time beyond t_end");
      std::copy(traj.states.row(k), traj.states.row(k) + cfg.n_nodes,
                out.sample(r));
      done[r] = true;
    }
  }
  return out;
}

}  // namespace romforge
