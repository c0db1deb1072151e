#pragma once

#include <cstddef>
#include <vector>

// Dense row-major matrices sized for desk-scale spectral work (a few
// hundred rows). Hot paths route through advq::kernels.

namespace advq::la {

using Vec = std::vector<double>;

class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}

  static Mat identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return a_[i * cols_ + j];
  }

  double* row(std::size_t i) { return a_.data() + i * cols_; }
  const double* row(std::size_t i) const { return a_.data() + i * cols_; }

  double* data() { return a_.data(); }
  const double* data() const { return a_.data(); }

  bool empty() const { return a_.empty(); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> a_;
};

Mat matmul(const Mat& a, const Mat& b);
Mat matmul_tn(const Mat& a, const Mat& b);  // a^T * b
Mat matmul_nt(const Mat& a, const Mat& b);  // a * b^T
Mat transpose(const Mat& a);
Vec matvec(const Mat& a, const Vec& x);
Vec matvec_t(const Mat& a, const Vec& x);  // a^T * x

Mat add(const Mat& a, const Mat& b);
Mat sub(const Mat& a, const Mat& b);
Mat scaled(const Mat& a, double s);
void add_inplace(Mat& a, const Mat& b, double s = 1.0);  // a += s*b

double dot(const Vec& x, const Vec& y);
double norm2(const Vec& x);
double frobenius_norm(const Mat& a);
double max_abs(const Mat& a);

// ||a - a^T||_max
double asymmetry(const Mat& a);
void symmetrize(Mat& a);

double trace_product(const Mat& a, const Mat& b);  // tr(a * b), b symmetric use

// Eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.
// Eigenvalues ascending; vectors.column(k) is the k-th eigenvector,
// returned with vectors stored row-major (vectors(i,k) = component i of
// eigenvector k). Deterministic for fixed input.
struct Eigh {
  Vec values;
  Mat vectors;
};
Eigh jacobi_eigh(const Mat& s);

// Largest |eigenvalue| of a symmetric matrix.
double spectral_norm_sym(const Mat& s);

// Spectral norm of a general rectangular matrix (largest singular value).
double spectral_norm(const Mat& a);

// Cholesky factor L (lower) with a(i,j) = sum_k L(i,k)L(j,k).
// Returns false if the matrix is not positive definite.
bool cholesky(const Mat& a, Mat& l);

// Solve L y = b, then L^T x = y.
Vec cholesky_solve(const Mat& l, const Vec& b);

// Inverse of a symmetric positive definite matrix from its Cholesky factor.
Mat cholesky_inverse(const Mat& l);

} // namespace advq::la
