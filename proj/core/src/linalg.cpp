#include "romforge/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "romforge/errors.hpp"

namespace romforge {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols,
                         std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_)
    throw shape_error("DenseMatrix: data length != rows*cols");
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
  return t;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

bool DenseMatrix::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

double DenseMatrix::frobenius_norm() const {
  double acc = 0.0;
  for (double v : data_) acc += v * v;
  return std::sqrt(acc);
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows())
    throw shape_error("matmul: inner dimensions disagree");
  DenseMatrix c(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a.at(i, k);
      const double* bk = b.row(k);
      for (std::size_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

std::vector<double> matvec(const DenseMatrix& a, const std::vector<double>& x) {
  if (a.cols() != x.size()) throw shape_error("matvec: dimension mismatch");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) acc += ai[j] * x[j];
    y[i] = acc;
  }
  return y;
}

std::vector<double> matvec_transposed(const DenseMatrix& a,
                                      const std::vector<double>& x) {
  if (a.rows() != x.size())
    throw shape_error("matvec_transposed: dimension mismatch");
  std::vector<double> y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    const double xi = x[i];
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += ai[j] * xi;
  }
  return y;
}

namespace {

// Column-major working storage for the Jacobi sweeps.
struct ColMat {
  std::size_t rows, cols;
  std::vector<double> d;  // column j at d[j*rows .. j*rows+rows)

  ColMat(std::size_t r, std::size_t c) : rows(r), cols(c), d(r * c, 0.0) {}

  double* col(std::size_t j) { return d.data() + j * rows; }
  const double* col(std::size_t j) const { return d.data() + j * rows; }
};

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

// Orthogonalize the columns of b in place, accumulating the applied
// rotations in v (initialized to identity).  Afterwards b = q * diag(s)
// with q the normalized columns and b_original = b * v^T.
void jacobi_orthogonalize(ColMat& b, ColMat& v) {
  constexpr double kTol = 1e-15;
  constexpr int kMaxSweeps = 60;

  const std::size_t p = b.rows, q = b.cols;
  double worst = 0.0;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    worst = 0.0;
    for (std::size_t i = 0; i + 1 < q; ++i) {
      for (std::size_t j = i + 1; j < q; ++j) {
        double* bi = b.col(i);
        double* bj = b.col(j);
        const double app = dot(bi, bi, p);
        const double aqq = dot(bj, bj, p);
        const double apq = dot(bi, bj, p);
        if (app == 0.0 || aqq == 0.0) continue;
        const double ratio = std::abs(apq) / std::sqrt(app * aqq);
        worst = std::max(worst, ratio);
        if (ratio <= kTol) continue;

        const double zeta = (aqq - app) / (2.0 * apq);
        const double t =
            (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;

        for (std::size_t r = 0; r < p; ++r) {
          const double x = bi[r], y = bj[r];
          bi[r] = c * x - s * y;
          bj[r] = s * x + c * y;
        }
        double* vi = v.col(i);
        double* vj = v.col(j);
        for (std::size_t r = 0; r < q; ++r) {
          const double x = vi[r], y = vj[r];
          vi[r] = c * x - s * y;
          vj[r] = s * x + c * y;
        }
        rotated = true;
      }
    }
    if (!rotated) return;
  }
  throw convergence_error("thin_svd: Jacobi sweeps did not converge", worst);
}

// Replace near-null columns of q with deterministic orthonormal completions:
// pick the canonical basis vector with the largest residual after projecting
// out every other column.
void complete_null_columns(ColMat& q, const std::vector<double>& s,
                           double sigma_tol) {
  const std::size_t p = q.rows, k = q.cols;
  for (std::size_t j = 0; j < k; ++j) {
    if (s[j] > sigma_tol) continue;
    std::size_t best_c = 0;
    double best_norm2 = -1.0;
    std::vector<double> best_v;
    std::vector<double> v(p);
    for (std::size_t c = 0; c < p; ++c) {
      std::fill(v.begin(), v.end(), 0.0);
      v[c] = 1.0;
      for (std::size_t m = 0; m < k; ++m) {
        if (m == j) continue;
        const double proj = dot(q.col(m), v.data(), p);
        const double* qm = q.col(m);
        for (std::size_t r = 0; r < p; ++r) v[r] -= proj * qm[r];
      }
      const double n2 = dot(v.data(), v.data(), p);
      if (n2 > best_norm2) {
        best_norm2 = n2;
        best_c = c;
        best_v = v;
      }
    }
    (void)best_c;
    const double nrm = std::sqrt(best_norm2);
    double* qj = q.col(j);
    for (std::size_t r = 0; r < p; ++r) qj[r] = best_v[r] / nrm;
  }
}

}  // namespace

ThinSvd thin_svd(const DenseMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) throw shape_error("thin_svd: empty matrix");
  if (!a.all_finite()) throw shape_error("thin_svd: non-finite entries");

  const bool transposed = a.rows() < a.cols();
  const std::size_t p = transposed ? a.cols() : a.rows();  // p >= q
  const std::size_t q = transposed ? a.rows() : a.cols();

  ColMat b(p, q);
  for (std::size_t j = 0; j < q; ++j) {
    double* bj = b.col(j);
    for (std::size_t i = 0; i < p; ++i)
      bj[i] = transposed ? a.at(j, i) : a.at(i, j);
  }
  ColMat v(q, q);
  for (std::size_t j = 0; j < q; ++j) v.col(j)[j] = 1.0;

  jacobi_orthogonalize(b, v);

  std::vector<double> sigma(q);
  for (std::size_t j = 0; j < q; ++j) sigma[j] = std::sqrt(dot(b.col(j), b.col(j), p));

  // Stable descending order by singular value.
  std::vector<std::size_t> order(q);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  ColMat qmat(p, q), vsort(q, q);
  std::vector<double> s(q);
  double smax = 0.0;
  for (std::size_t j = 0; j < q; ++j) smax = std::max(smax, sigma[j]);
  for (std::size_t j = 0; j < q; ++j) {
    const std::size_t src = order[j];
    s[j] = sigma[src];
    std::copy(v.col(src), v.col(src) + q, vsort.col(j));
    if (sigma[src] > 0.0) {
      const double inv = 1.0 / sigma[src];
      const double* bs = b.col(src);
      double* qj = qmat.col(j);
      for (std::size_t r = 0; r < p; ++r) qj[r] = bs[r] * inv;
    }
  }
  const double sigma_tol = smax * 1e-300 + 0.0;  // exact zeros only
  complete_null_columns(qmat, s, sigma_tol);

  // b_original = qmat * diag(s) * vsort^T (all p x q level), so:
  //   a (m>=n):  u = qmat (m x k),  vt = vsort^T (k x n)
  //   a (m<n):   a = vsort * diag(s) * qmat^T:  u = vsort, vt = qmat^T
  const std::size_t k = q;
  ThinSvd out;
  out.s = std::move(s);
  if (!transposed) {
    out.u = DenseMatrix(p, k);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < k; ++j) out.u.at(i, j) = qmat.col(j)[i];
    out.vt = DenseMatrix(k, q);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < q; ++j) out.vt.at(i, j) = vsort.col(i)[j];
  } else {
    out.u = DenseMatrix(q, k);
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t j = 0; j < k; ++j) out.u.at(i, j) = vsort.col(j)[i];
    out.vt = DenseMatrix(k, p);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < p; ++j) out.vt.at(i, j) = qmat.col(i)[j];
  }

  // Sign canonicalization: largest-magnitude entry of each u column positive.
  for (std::size_t j = 0; j < k; ++j) {
    std::size_t arg = 0;
    double mag = -1.0;
    for (std::size_t i = 0; i < out.u.rows(); ++i) {
      const double m = std::abs(out.u.at(i, j));
      if (m > mag) {
        mag = m;
        arg = i;
      }
    }
    if (out.u.at(arg, j) < 0.0) {
      for (std::size_t i = 0; i < out.u.rows(); ++i) out.u.at(i, j) = -out.u.at(i, j);
      for (std::size_t i = 0; i < out.vt.cols(); ++i) out.vt.at(j, i) = -out.vt.at(j, i);
    }
  }
  return out;
}

}  // namespace romforge
