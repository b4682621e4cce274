#pragma once

#include <cstddef>
#include <vector>

namespace romforge {

// Dense row-major matrix of 64-bit floats.
class DenseMatrix {
 public:
  DenseMatrix() : rows_(0), cols_(0) {}
  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  const double* row(std::size_t i) const { return data_.data() + i * cols_; }
  double* row(std::size_t i) { return data_.data() + i * cols_; }

  DenseMatrix transposed() const;

  static DenseMatrix identity(std::size_t n);

  bool all_finite() const;
  double frobenius_norm() const;

 private:
  std::size_t rows_, cols_;
  std::vector<double> data_;
};

// Thin SVD a = u * diag(s) * vt with k = min(rows, cols).
// Columns of u and rows of vt are orthonormal; s is non-increasing and
// non-negative; signs are canonicalized so the largest-magnitude entry of
// each column of u is positive.
struct ThinSvd {
  DenseMatrix u;           // m x k
  std::vector<double> s;   // k, descending
  DenseMatrix vt;          // k x n
};

// Standard product with deterministic left-to-right accumulation over the
// inner index.  Throws shape_error on dimension mismatch.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

// y = A x  and  y = A^T x for vectors.
std::vector<double> matvec(const DenseMatrix& a, const std::vector<double>& x);
std::vector<double> matvec_transposed(const DenseMatrix& a,
                                      const std::vector<double>& x);

// One-sided Jacobi SVD applied to the thinner orientation of a.
// Throws convergence_error (carrying the residual off-diagonal measure) if
// the sweep cap is exceeded, shape_error on an empty input.
ThinSvd thin_svd(const DenseMatrix& a);

}  // namespace romforge
