#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "fsc/dense.hpp"

namespace fsc {

struct DenseEigen {
  std::vector<double> values;  // ascending
  Matrix vectors;              // orthonormal columns, vectors.col(i) pairs with values[i]
};

namespace detail {

// Householder reduction of a symmetric matrix to tridiagonal form with
// accumulation of the orthogonal transform. On return z holds Q, d the
// diagonal and e the subdiagonal (e[0] unused).
inline void tridiagonalize(Matrix& z, std::vector<double>& d, std::vector<double>& e) {
  const int n = z.rows();
  for (int i = n - 1; i > 0; --i) {
    const int l = i - 1;
    double h = 0.0, scale = 0.0;
    if (l > 0) {
      for (int k = 0; k <= l; ++k) scale += std::abs(z(i, k));
      if (scale == 0.0) {
        e[i] = z(i, l);
      } else {
        for (int k = 0; k <= l; ++k) {
          z(i, k) /= scale;
          h += z(i, k) * z(i, k);
        }
        double f = z(i, l);
        double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        z(i, l) = f - g;
        f = 0.0;
        for (int j = 0; j <= l; ++j) {
          z(j, i) = z(i, j) / h;
          g = 0.0;
          for (int k = 0; k <= j; ++k) g += z(j, k) * z(i, k);
          for (int k = j + 1; k <= l; ++k) g += z(k, j) * z(i, k);
          e[j] = g / h;
          f += e[j] * z(i, j);
        }
        const double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) {
          f = z(i, j);
          e[j] = g = e[j] - hh * f;
          for (int k = 0; k <= j; ++k) z(j, k) -= f * e[k] + g * z(i, k);
        }
      }
    } else {
      e[i] = z(i, l);
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    const int l = i - 1;
    if (d[i] != 0.0) {
      for (int j = 0; j <= l; ++j) {
        double g = 0.0;
        for (int k = 0; k <= l; ++k) g += z(i, k) * z(k, j);
        for (int k = 0; k <= l; ++k) z(k, j) -= g * z(k, i);
      }
    }
    d[i] = z(i, i);
    z(i, i) = 1.0;
    for (int j = 0; j <= l; ++j) z(j, i) = z(i, j) = 0.0;
  }
}

// Implicit-shift QL on the tridiagonal (d, e), rotations applied to z.
inline void ql_implicit(std::vector<double>& d, std::vector<double>& e, Matrix& z) {
  const int n = static_cast<int>(d.size());
  const double eps = std::numeric_limits<double>::epsilon();
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 50)
          throw std::runtime_error("dense_eigen: QL iteration failed to converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i = m - 1;
        for (; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (int k = 0; k < n; ++k) {
            f = z(k, i + 1);
            z(k, i + 1) = s * z(k, i) + c * f;
            z(k, i) = c * z(k, i) - s * f;
          }
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

// Diagonal similarity scaling (powers of two) that brings row and column
// norms together. Eigenvalues are unchanged; zero patterns are preserved,
// so upper Hessenberg inputs stay upper Hessenberg.
inline void balance_in_place(Matrix& a) {
  const int n = a.rows();
  const double radix = 2.0;
  const double sqrdx = radix * radix;
  bool done = false;
  while (!done) {
    done = true;
    for (int i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        g = 1.0 / f;
        for (int j = 0; j < n; ++j) a(i, j) *= g;
        for (int j = 0; j < n; ++j) a(j, i) *= f;
      }
    }
  }
}

// Reduction to upper Hessenberg form by stabilized elementary similarity
// transforms. The multiplier storage below the subdiagonal is cleared on
// exit; only eigenvalues survive this reduction, not eigenvectors.
inline void hessenberg_in_place(Matrix& a) {
  const int n = a.rows();
  for (int m = 1; m < n - 1; ++m) {
    double x = 0.0;
    int piv = m;
    for (int j = m; j < n; ++j) {
      if (std::abs(a(j, m - 1)) > std::abs(x)) {
        x = a(j, m - 1);
        piv = j;
      }
    }
    if (piv != m) {
      for (int j = m - 1; j < n; ++j) std::swap(a(piv, j), a(m, j));
      for (int j = 0; j < n; ++j) std::swap(a(j, piv), a(j, m));
    }
    if (x != 0.0) {
      for (int i = m + 1; i < n; ++i) {
        double y = a(i, m - 1);
        if (y == 0.0) continue;
        y /= x;
        a(i, m - 1) = y;
        for (int j = m; j < n; ++j) a(i, j) -= y * a(m, j);
        for (int j = 0; j < n; ++j) a(j, m) += y * a(j, i);
      }
    }
  }
  for (int j = 0; j < n - 2; ++j)
    for (int i = j + 2; i < n; ++i) a(i, j) = 0.0;
}

// Francis double-shift QR on an upper Hessenberg matrix; fills wr/wi with
// the real and imaginary eigenvalue parts. Destroys a.
inline void hessenberg_qr_values(Matrix& a, std::vector<double>& wr, std::vector<double>& wi) {
  const int n = a.rows();
  wr.assign(n, 0.0);
  wi.assign(n, 0.0);
  if (n == 0) return;
  const double eps = std::numeric_limits<double>::epsilon();
  double anorm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));
  if (anorm == 0.0) return;
  int nn = n - 1;
  double t = 0.0;
  while (nn >= 0) {
    int its = 0;
    int l;
    do {
      for (l = nn; l >= 1; --l) {
        double s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) <= eps * s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      double x = a(nn, nn);
      if (l == nn) {
        wr[nn] = x + t;
        wi[nn--] = 0.0;
      } else {
        double y = a(nn - 1, nn - 1);
        double w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          double p = 0.5 * (y - x);
          double q = p * p + w;
          double z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + std::copysign(z, p);
            wr[nn - 1] = wr[nn] = x + z;
            if (z != 0.0) wr[nn] = x - w / z;
            wi[nn - 1] = wi[nn] = 0.0;
          } else {
            wr[nn - 1] = wr[nn] = x + p;
            wi[nn - 1] = -(wi[nn] = z);
          }
          nn -= 2;
        } else {
          if (its == 60)
            throw std::runtime_error("hessenberg_qr_values: too many QR iterations");
          if (its > 0 && its % 10 == 0) {
            t += x;
            for (int i = 0; i <= nn; ++i) a(i, i) -= x;
            double s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          double p = 0.0, q = 0.0, r = 0.0;
          int m;
          for (m = nn - 2; m >= l; --m) {
            const double z = a(m, m);
            const double rr = x - z;
            const double ss = y - z;
            p = (rr * ss - w) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - rr - ss;
            r = a(m + 2, m + 1);
            const double scale = std::abs(p) + std::abs(q) + std::abs(r);
            p /= scale;
            q /= scale;
            r /= scale;
            if (m == l) break;
            const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
            const double v =
                std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
            if (u <= eps * v) break;
          }
          for (int i = m + 2; i <= nn; ++i) {
            a(i, i - 2) = 0.0;
            if (i != m + 2) a(i, i - 3) = 0.0;
          }
          for (int k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = k != nn - 1 ? a(k + 2, k - 1) : 0.0;
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            const double s = std::copysign(std::sqrt(p * p + q * q + r * r), p);
            if (s == 0.0) continue;
            if (k == m) {
              if (l != m) a(k, k - 1) = -a(k, k - 1);
            } else {
              a(k, k - 1) = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            const double z = r / s;
            q /= p;
            r /= p;
            for (int j = k; j <= nn; ++j) {
              p = a(k, j) + q * a(k + 1, j);
              if (k != nn - 1) {
                p += r * a(k + 2, j);
                a(k + 2, j) -= p * z;
              }
              a(k + 1, j) -= p * y;
              a(k, j) -= p * x;
            }
            const int mmin = nn < k + 3 ? nn : k + 3;
            for (int i = l; i <= mmin; ++i) {
              p = x * a(i, k) + y * a(i, k + 1);
              if (k != nn - 1) {
                p += z * a(i, k + 2);
                a(i, k + 2) -= p * r;
              }
              a(i, k + 1) -= p * q;
              a(i, k) -= p;
            }
          }
        }
      }
    } while (l < nn - 1);
  }
}

}  // namespace detail

// Full eigendecomposition of a symmetric matrix, eigenvalues ascending.
// Inputs farther than asym_tol (relative) from symmetric are rejected;
// anything closer is symmetrized before reduction.
inline DenseEigen dense_eigen(const Matrix& a, double asym_tol = 1e-8) {
  if (a.rows() != a.cols()) throw std::invalid_argument("dense_eigen: matrix not square");
  const int n = a.rows();
  if (n == 0) return {};
  double asym = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < j; ++i) asym = std::max(asym, std::abs(a(i, j) - a(j, i)));
  if (asym > asym_tol * std::max(1.0, max_abs(a)))
    throw std::invalid_argument("dense_eigen: input matrix is not symmetric");

  DenseEigen out;
  out.vectors = Matrix(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) out.vectors(i, j) = 0.5 * (a(i, j) + a(j, i));
  out.values.assign(n, 0.0);
  std::vector<double> e(n, 0.0);
  if (n == 1) {
    out.values[0] = out.vectors(0, 0);
    out.vectors(0, 0) = 1.0;
    return out;
  }
  detail::tridiagonalize(out.vectors, out.values, e);
  detail::ql_implicit(out.values, e, out.vectors);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return out.values[x] < out.values[y]; });
  DenseEigen sorted;
  sorted.values.resize(n);
  sorted.vectors = Matrix(n, n);
  for (int j = 0; j < n; ++j) {
    sorted.values[j] = out.values[order[j]];
    std::copy(out.vectors.col(order[j]), out.vectors.col(order[j]) + n, sorted.vectors.col(j));
  }
  return sorted;
}

// Symmetric positive definite square root and inverse square root via the
// eigendecomposition. Fails if the smallest eigenvalue is not safely
// positive relative to the largest.
struct SpdRoots {
  Matrix sqrt;
  Matrix inv_sqrt;
};

inline SpdRoots spd_roots(const Matrix& a, double rel_tol = 1e-12) {
  const DenseEigen ed = dense_eigen(a);
  const int n = a.rows();
  const double top = ed.values.empty() ? 0.0 : ed.values.back();
  if (top <= 0.0 || ed.values.front() <= rel_tol * top)
    throw SingularMatrixError("spd_roots: matrix is not positive definite");
  Matrix half(n, n), inv_half(n, n);
  for (int j = 0; j < n; ++j) {
    const double rs = std::sqrt(ed.values[j]);
    for (int i = 0; i < n; ++i) {
      half(i, j) = ed.vectors(i, j) * rs;
      inv_half(i, j) = ed.vectors(i, j) / rs;
    }
  }
  const Matrix vt = transpose(ed.vectors);
  return {matmul(half, vt), matmul(inv_half, vt)};
}

// Eigenvalues of an upper Hessenberg matrix (balanced first, which keeps
// the Hessenberg pattern). Unsorted; conjugate pairs come out adjacent.
inline void hessenberg_spectrum(Matrix h, std::vector<double>& wr, std::vector<double>& wi) {
  if (h.rows() != h.cols())
    throw std::invalid_argument("hessenberg_spectrum: matrix not square");
  detail::balance_in_place(h);
  detail::hessenberg_qr_values(h, wr, wi);
}

// Eigenvalues of an arbitrary square matrix. No symmetry assumption, no
// eigenvectors; use dense_eigen for the symmetric case.
inline std::vector<std::complex<double>> general_spectrum(Matrix a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("general_spectrum: matrix not square");
  const int n = a.rows();
  std::vector<std::complex<double>> out;
  if (n == 0) return out;
  detail::balance_in_place(a);
  detail::hessenberg_in_place(a);
  std::vector<double> wr, wi;
  detail::hessenberg_qr_values(a, wr, wi);
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.emplace_back(wr[i], wi[i]);
  return out;
}

}  // namespace fsc
