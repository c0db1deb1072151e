#include "advq/linalg.hpp"

#include "advq/error.hpp"
#include "advq/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace advq::la {

namespace k = advq::kernels;

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows())
    throw Error(Error::Kind::Usage, "linalg", "matmul shape mismatch");
  Mat c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* ci = c.row(i);
    const double* ai = a.row(i);
    for (std::size_t l = 0; l < a.cols(); ++l) {
      const double ail = ai[l];
      if (ail != 0.0) k::axpy(ail, b.row(l), ci, b.cols());
    }
  }
  return c;
}

Mat matmul_tn(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows())
    throw Error(Error::Kind::Usage, "linalg", "matmul_tn shape mismatch");
  Mat c(a.cols(), b.cols());
  for (std::size_t l = 0; l < a.rows(); ++l) {
    const double* al = a.row(l);
    const double* bl = b.row(l);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      if (al[i] != 0.0) k::axpy(al[i], bl, c.row(i), b.cols());
    }
  }
  return c;
}

Mat matmul_nt(const Mat& a, const Mat& b) {
  if (a.cols() != b.cols())
    throw Error(Error::Kind::Usage, "linalg", "matmul_nt shape mismatch");
  Mat c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j)
      ci[j] = k::dot(ai, b.row(j), a.cols());
  }
  return c;
}

Mat transpose(const Mat& a) {
  Mat t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Vec matvec(const Mat& a, const Vec& x) {
  if (a.cols() != x.size())
    throw Error(Error::Kind::Usage, "linalg", "matvec shape mismatch");
  Vec y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    y[i] = k::dot(a.row(i), x.data(), a.cols());
  return y;
}

Vec matvec_t(const Mat& a, const Vec& x) {
  if (a.rows() != x.size())
    throw Error(Error::Kind::Usage, "linalg", "matvec_t shape mismatch");
  Vec y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    if (x[i] != 0.0) k::axpy(x[i], a.row(i), y.data(), a.cols());
  return y;
}

Mat add(const Mat& a, const Mat& b) {
  Mat c = a;
  add_inplace(c, b, 1.0);
  return c;
}

Mat sub(const Mat& a, const Mat& b) {
  Mat c = a;
  add_inplace(c, b, -1.0);
  return c;
}

Mat scaled(const Mat& a, double s) {
  Mat c = a;
  k::scal(s, c.data(), c.rows() * c.cols());
  return c;
}

void add_inplace(Mat& a, const Mat& b, double s) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(Error::Kind::Usage, "linalg", "add shape mismatch");
  k::axpy(s, b.data(), a.data(), a.rows() * a.cols());
}

double dot(const Vec& x, const Vec& y) {
  if (x.size() != y.size())
    throw Error(Error::Kind::Usage, "linalg", "dot length mismatch");
  return k::dot(x.data(), y.data(), x.size());
}

double norm2(const Vec& x) { return std::sqrt(k::nrm2sq(x.data(), x.size())); }

double frobenius_norm(const Mat& a) {
  return std::sqrt(k::nrm2sq(a.data(), a.rows() * a.cols()));
}

double max_abs(const Mat& a) {
  double m = 0.0;
  const double* p = a.data();
  for (std::size_t i = 0; i < a.rows() * a.cols(); ++i)
    m = std::max(m, std::fabs(p[i]));
  return m;
}

double asymmetry(const Mat& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      m = std::max(m, std::fabs(a(i, j) - a(j, i)));
  return m;
}

void symmetrize(Mat& a) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = v;
      a(j, i) = v;
    }
}

double trace_product(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows() || a.rows() != b.cols())
    throw Error(Error::Kind::Usage, "linalg", "trace_product shape mismatch");
  double t = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t l = 0; l < a.cols(); ++l) t += a(i, l) * b(l, i);
  return t;
}

Eigh jacobi_eigh(const Mat& s) {
  const std::size_t n = s.rows();
  if (n != s.cols())
    throw Error(Error::Kind::Usage, "linalg", "jacobi_eigh needs square input");

  Mat a = s;
  symmetrize(a);
  Mat v = Mat::identity(n);

  const double fnorm = frobenius_norm(a);
  if (fnorm == 0.0 || n == 1) {
    Eigh out;
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.values[i] = a(i, i);
    out.vectors = v;
    return out;
  }

  const double tol = 1e-15 * fnorm;
  const int max_sweeps = 64;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    off = std::sqrt(2.0 * off);
    if (off <= tol) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::fabs(apq) <= 1e-3 * tol / double(n)) continue;

        const double app = a(p, p);
        const double aqq = a(q, q);
        // Annihilation root matching the rot() convention x' = c*x + s*y.
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0)
                             ? -1.0 / (theta + std::sqrt(1.0 + theta * theta))
                             : -1.0 / (theta - std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * c;

        // A <- J^T A J with J the (p,q) rotation: rotate rows, then columns.
        k::rot(a.row(p), a.row(q), n, c, sn);
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = c * aip + sn * aiq;
          a(i, q) = -sn * aip + c * aiq;
        }
        k::rot(v.row(p), v.row(q), n, c, sn);
      }
    }
  }

  // v currently holds V^T in its rows; report eigenvalues ascending.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return diag[i] < diag[j]; });

  Eigh out;
  out.values.resize(n);
  out.vectors = Mat(n, n);
  for (std::size_t k2 = 0; k2 < n; ++k2) {
    out.values[k2] = diag[order[k2]];
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k2) = v(order[k2], i);
  }
  return out;
}

double spectral_norm_sym(const Mat& s) {
  const Eigh e = jacobi_eigh(s);
  double m = 0.0;
  for (double lam : e.values) m = std::max(m, std::fabs(lam));
  return m;
}

double spectral_norm(const Mat& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  // Largest eigenvalue of the smaller Gram matrix.
  const Mat g = (a.rows() <= a.cols()) ? matmul_nt(a, a) : matmul_tn(a, a);
  const Eigh e = jacobi_eigh(g);
  const double top = e.values.empty() ? 0.0 : e.values.back();
  return std::sqrt(std::max(0.0, top));
}

bool cholesky(const Mat& a, Mat& l) {
  const std::size_t n = a.rows();
  if (n != a.cols())
    throw Error(Error::Kind::Usage, "linalg", "cholesky needs square input");
  l = Mat(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j) - k::nrm2sq(l.row(j), j);
    if (d <= 0.0) return false;
    d = std::sqrt(d);
    l(j, j) = d;
    for (std::size_t i = j + 1; i < n; ++i)
      l(i, j) = (a(i, j) - k::dot(l.row(i), l.row(j), j)) / d;
  }
  return true;
}

Vec cholesky_solve(const Mat& l, const Vec& b) {
  const std::size_t n = l.rows();
  Vec y(n);
  for (std::size_t i = 0; i < n; ++i)
    y[i] = (b[i] - k::dot(l.row(i), y.data(), i)) / l(i, i);
  Vec x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= l(j, ii) * x[j];
    x[ii] = s / l(ii, ii);
  }
  return x;
}

Mat cholesky_inverse(const Mat& l) {
  const std::size_t n = l.rows();
  // Invert L in place (lower triangular), then form L^-T L^-1.
  Mat li(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    li(j, j) = 1.0 / l(j, j);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = 0.0;
      for (std::size_t kk = j; kk < i; ++kk) s += l(i, kk) * li(kk, j);
      li(i, j) = -s / l(i, i);
    }
  }
  Mat inv(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t kk = i; kk < n; ++kk) s += li(kk, i) * li(kk, j);
      inv(i, j) = s;
      inv(j, i) = s;
    }
  return inv;
}

} // namespace advq::la
