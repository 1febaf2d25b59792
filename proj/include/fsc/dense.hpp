#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsc {

class SingularMatrixError : public std::runtime_error {
 public:
  explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

// Dense column-major matrix of doubles. Small and deliberately plain:
// everything the library needs beyond sparse matvecs fits in a few
// hundred lines, and keeping it in-repo avoids a numerics dependency.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(check_size(rows, cols), 0.0) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(j) * rows_ + i]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(j) * rows_ + i]; }

  double* col(int j) { return data_.data() + static_cast<std::size_t>(j) * rows_; }
  const double* col(int j) const { return data_.data() + static_cast<std::size_t>(j) * rows_; }

  std::span<double> col_span(int j) { return {col(j), static_cast<std::size_t>(rows_)}; }
  std::span<const double> col_span(int j) const {
    return {col(j), static_cast<std::size_t>(rows_)};
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

 private:
  static std::size_t check_size(int rows, int cols) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative dimension");
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(double alpha, std::span<double> x) {
  for (double& v : x) v *= alpha;
}

// C = A * B, column-major gaxpy ordering.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (int j = 0; j < b.cols(); ++j) {
    double* cj = c.col(j);
    for (int l = 0; l < a.cols(); ++l) {
      const double blj = b(l, j);
      if (blj == 0.0) continue;
      const double* al = a.col(l);
      for (int i = 0; i < a.rows(); ++i) cj[i] += blj * al[i];
    }
  }
  return c;
}

// C = A^T * B without forming A^T.
inline Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("matmul_at_b: row counts differ");
  Matrix c(a.cols(), b.cols());
  for (int j = 0; j < b.cols(); ++j) {
    const double* bj = b.col(j);
    for (int i = 0; i < a.cols(); ++i) {
      c(i, j) = dot({a.col(i), static_cast<std::size_t>(a.rows())},
                    {bj, static_cast<std::size_t>(b.rows())});
    }
  }
  return c;
}

inline Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (int j = 0; j < a.cols(); ++j)
    for (int i = 0; i < a.rows(); ++i) t(j, i) = a(i, j);
  return t;
}

inline double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (int j = 0; j < a.cols(); ++j)
    for (int i = 0; i < a.rows(); ++i) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

inline double max_abs(const Matrix& a) {
  double m = 0.0;
  for (int j = 0; j < a.cols(); ++j)
    for (int i = 0; i < a.rows(); ++i) m = std::max(m, std::abs(a(i, j)));
  return m;
}

inline double max_abs_offdiag(const Matrix& a) {
  double m = 0.0;
  for (int j = 0; j < a.cols(); ++j)
    for (int i = 0; i < a.rows(); ++i)
      if (i != j) m = std::max(m, std::abs(a(i, j)));
  return m;
}

inline void matvec(const Matrix& a, std::span<const double> x, std::span<double> y) {
  if (static_cast<int>(x.size()) != a.cols() || static_cast<int>(y.size()) != a.rows())
    throw std::invalid_argument("matvec: size mismatch");
  std::fill(y.begin(), y.end(), 0.0);
  for (int j = 0; j < a.cols(); ++j) axpy(x[j], a.col_span(j), y);
}

inline void matvec_t(const Matrix& a, std::span<const double> x, std::span<double> y) {
  if (static_cast<int>(x.size()) != a.rows() || static_cast<int>(y.size()) != a.cols())
    throw std::invalid_argument("matvec_t: size mismatch");
  for (int j = 0; j < a.cols(); ++j) y[j] = dot(a.col_span(j), x);
}

// LU factorization with partial pivoting, stored packed.
struct LuFactors {
  Matrix lu;
  std::vector<int> piv;
  int sign = 1;
};

inline LuFactors lu_factor(Matrix a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("lu_factor: matrix not square");
  const int n = a.rows();
  LuFactors f{std::move(a), std::vector<int>(n), 1};
  Matrix& m = f.lu;
  for (int i = 0; i < n; ++i) f.piv[i] = i;
  for (int k = 0; k < n; ++k) {
    int p = k;
    double best = std::abs(m(k, k));
    for (int i = k + 1; i < n; ++i) {
      const double v = std::abs(m(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (best == 0.0) throw SingularMatrixError("lu_factor: matrix is singular");
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(m(p, j), m(k, j));
      std::swap(f.piv[p], f.piv[k]);
      f.sign = -f.sign;
    }
    const double pivot = m(k, k);
    for (int i = k + 1; i < n; ++i) {
      m(i, k) /= pivot;
      const double lik = m(i, k);
      if (lik == 0.0) continue;
      for (int j = k + 1; j < n; ++j) m(i, j) -= lik * m(k, j);
    }
  }
  return f;
}

inline void lu_solve(const LuFactors& f, std::span<double> x) {
  const int n = f.lu.rows();
  if (static_cast<int>(x.size()) != n) throw std::invalid_argument("lu_solve: size mismatch");
  std::vector<double> b(n);
  for (int i = 0; i < n; ++i) b[i] = x[f.piv[i]];
  for (int i = 1; i < n; ++i) {
    double s = b[i];
    for (int j = 0; j < i; ++j) s -= f.lu(i, j) * b[j];
    b[i] = s;
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= f.lu(i, j) * b[j];
    b[i] = s / f.lu(i, i);
  }
  std::copy(b.begin(), b.end(), x.begin());
}

inline Matrix lu_solve_mat(const LuFactors& f, Matrix b) {
  for (int j = 0; j < b.cols(); ++j) lu_solve(f, b.col_span(j));
  return b;
}

inline Matrix lu_invert(const LuFactors& f) { return lu_solve_mat(f, Matrix::identity(f.lu.rows())); }

// Modified Gram-Schmidt with one re-orthogonalization pass; columns with
// no surviving component are zeroed and reported via the return count.
inline int mgs_orthonormalize(Matrix& q, double drop_tol = 1e-12) {
  int kept = 0;
  for (int j = 0; j < q.cols(); ++j) {
    auto v = q.col_span(j);
    const double before = norm2(v);
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i < j; ++i) {
        auto qi = q.col_span(i);
        axpy(-dot(qi, v), qi, v);
      }
    }
    const double after = norm2(v);
    if (before == 0.0 || after <= drop_tol * std::max(1.0, before)) {
      std::fill(v.begin(), v.end(), 0.0);
    } else {
      scale(1.0 / after, v);
      ++kept;
    }
  }
  return kept;
}

namespace detail {

// Householder QR of a (rows >= cols). Reflectors are returned in-place in
// the lower triangle plus a tau vector; r_diag holds the diagonal of R.
struct HouseholderQr {
  Matrix qr;
  std::vector<double> tau;
  std::vector<double> r_diag;
};

inline HouseholderQr householder_qr(Matrix a) {
  const int m = a.rows();
  const int n = a.cols();
  if (m < n) throw std::invalid_argument("householder_qr: more columns than rows");
  HouseholderQr out{std::move(a), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  Matrix& q = out.qr;
  for (int k = 0; k < n; ++k) {
    double alpha = 0.0;
    for (int i = k; i < m; ++i) alpha += q(i, k) * q(i, k);
    alpha = std::sqrt(alpha);
    if (alpha == 0.0) {
      out.tau[k] = 0.0;
      out.r_diag[k] = 0.0;
      continue;
    }
    if (q(k, k) > 0.0) alpha = -alpha;
    for (int i = k; i < m; ++i) q(i, k) /= -alpha;
    q(k, k) += 1.0;
    out.tau[k] = q(k, k);
    out.r_diag[k] = alpha;
    for (int j = k + 1; j < n; ++j) {
      double s = 0.0;
      for (int i = k; i < m; ++i) s += q(i, k) * q(i, j);
      s = -s / q(k, k);
      for (int i = k; i < m; ++i) q(i, j) += s * q(i, k);
    }
  }
  return out;
}

// Applies Q (the product of the stored reflectors) to e_col, writing the
// result into out. Reflectors are applied last-to-first.
inline void apply_q_to_unit(const HouseholderQr& f, int col, std::span<double> out) {
  const int m = f.qr.rows();
  const int n = f.qr.cols();
  std::fill(out.begin(), out.end(), 0.0);
  out[col] = 1.0;
  for (int k = n - 1; k >= 0; --k) {
    if (f.tau[k] == 0.0) continue;
    double s = 0.0;
    for (int i = k; i < m; ++i) s += f.qr(i, k) * out[i];
    s = -s / f.qr(k, k);
    for (int i = k; i < m; ++i) out[i] += s * f.qr(i, k);
  }
}

}  // namespace detail

// Orthonormal basis for range(a); a must have full column rank.
inline Matrix orthonormal_range(const Matrix& a, double rank_tol = 1e-12) {
  const auto f = detail::householder_qr(a);
  double scale_ref = 0.0;
  for (double d : f.r_diag) scale_ref = std::max(scale_ref, std::abs(d));
  for (double d : f.r_diag) {
    if (std::abs(d) <= rank_tol * std::max(1.0, scale_ref))
      throw SingularMatrixError("orthonormal_range: input is rank deficient");
  }
  Matrix q(a.rows(), a.cols());
  for (int j = 0; j < a.cols(); ++j) detail::apply_q_to_unit(f, j, q.col_span(j));
  return q;
}

// Orthonormal basis for the orthogonal complement of range(a), i.e. an
// n x (n - r) matrix Z with Z^T a = 0 and Z^T Z = I.
inline Matrix orthonormal_complement(const Matrix& a, double rank_tol = 1e-12) {
  const auto f = detail::householder_qr(a);
  double scale_ref = 0.0;
  for (double d : f.r_diag) scale_ref = std::max(scale_ref, std::abs(d));
  for (double d : f.r_diag) {
    if (std::abs(d) <= rank_tol * std::max(1.0, scale_ref))
      throw SingularMatrixError("orthonormal_complement: input is rank deficient");
  }
  const int n = a.rows();
  const int r = a.cols();
  Matrix z(n, n - r);
  for (int j = r; j < n; ++j) detail::apply_q_to_unit(f, j, z.col_span(j - r));
  return z;
}

}  // namespace fsc
