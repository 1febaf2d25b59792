#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fsc/dense.hpp"
#include "fsc/dense_eigen.hpp"
#include "fsc/operators.hpp"
#include "fsc/rng.hpp"

namespace fsc {

enum class Which { largest, smallest };

struct EigenRequest {
  const LinearOperator* op = nullptr;
  int k = 1;
  Which which = Which::largest;
  double tol = 1e-8;
  int max_restarts = 1000;
  // Krylov basis size; 0 picks a per-solver default, capped at the dimension.
  int subspace = 0;
  std::uint64_t seed = 0;
};

struct EigenStats {
  int restarts = 0;
  std::uint64_t matvecs = 0;
  std::vector<double> residuals;        // final residual per returned pair
  std::vector<double> restart_history;  // max target residual after each projection
  double anorm_estimate = 0.0;
  double seconds = 0.0;
};

struct EigenResult {
  std::vector<double> values;  // largest mode: descending; smallest mode: ascending
  // Imaginary parts matching `values`. All zero for self-adjoint operators;
  // a general operator can put a conjugate pair among the targets, in which
  // case `values` carries the shared real part and this records the split.
  std::vector<double> values_imag;
  Matrix vectors;  // one column per value
  EigenStats stats;
};

class EigenConvergenceError : public std::runtime_error {
 public:
  EigenConvergenceError(const std::string& what, EigenResult partial_result)
      : std::runtime_error(what), partial(std::move(partial_result)) {}
  EigenResult partial;
};

namespace detail {

struct LanczosWorkspace {
  Matrix v;               // n x (p+1): basis plus the residual direction
  Matrix t;               // p x p projected matrix
  std::vector<double> w;  // matvec target / candidate vector
  std::vector<double> c;  // reorthogonalization coefficients
};

// Solves (a - lambda I) x = rhs in place by dense complex LU with partial
// pivoting. Returns false on an exactly singular pivot so the caller can
// retry with a jittered shift; near-singular systems are solved as-is,
// which is exactly what inverse iteration wants.
inline bool shifted_solve(const Matrix& a, std::complex<double> lambda,
                          std::vector<std::complex<double>>& rhs) {
  const int m = a.rows();
  std::vector<std::complex<double>> lu(static_cast<std::size_t>(m) * m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i)
      lu[i + static_cast<std::size_t>(j) * m] =
          std::complex<double>(a(i, j), 0.0) - (i == j ? lambda : 0.0);
  for (int j = 0; j < m; ++j) {
    int p = j;
    double best = std::abs(lu[j + static_cast<std::size_t>(j) * m]);
    for (int i = j + 1; i < m; ++i) {
      const double cand = std::abs(lu[i + static_cast<std::size_t>(j) * m]);
      if (cand > best) {
        best = cand;
        p = i;
      }
    }
    if (!(best > 1e-300)) return false;
    if (p != j) {
      for (int col = 0; col < m; ++col)
        std::swap(lu[p + static_cast<std::size_t>(col) * m],
                  lu[j + static_cast<std::size_t>(col) * m]);
      std::swap(rhs[p], rhs[j]);
    }
    const std::complex<double> pivot = lu[j + static_cast<std::size_t>(j) * m];
    for (int i = j + 1; i < m; ++i) {
      const std::complex<double> lij = lu[i + static_cast<std::size_t>(j) * m] / pivot;
      if (lij == 0.0) continue;
      for (int col = j + 1; col < m; ++col)
        lu[i + static_cast<std::size_t>(col) * m] -=
            lij * lu[j + static_cast<std::size_t>(col) * m];
      rhs[i] -= lij * rhs[j];
    }
  }
  for (int i = m - 1; i >= 0; --i) {
    std::complex<double> s = rhs[i];
    for (int col = i + 1; col < m; ++col)
      s -= lu[i + static_cast<std::size_t>(col) * m] * rhs[col];
    rhs[i] = s / lu[i + static_cast<std::size_t>(i) * m];
  }
  return true;
}

// Unit eigenvector estimate of a real matrix at a computed eigenvalue,
// via two steps of inverse iteration. Complex arithmetic covers conjugate
// pairs with the same code path; the shift is jittered off the exact
// eigenvalue so the factorization stays usable. The result is rotated so
// its largest entry lies on the positive real axis, making the split into
// real and imaginary parts reproducible.
inline std::vector<std::complex<double>> inverse_iteration_vec(const Matrix& a, double lr,
                                                               double li, double scale_hint) {
  const int m = a.rows();
  const double eps = std::numeric_limits<double>::epsilon();
  std::vector<std::complex<double>> y(m, std::complex<double>(1.0, 0.0));
  auto renorm = [&] {
    double s = 0.0;
    for (const auto& c : y) s += std::norm(c);
    s = std::sqrt(s);
    if (s > 0.0)
      for (auto& c : y) c /= s;
  };
  renorm();
  const double jitter0 = 64.0 * eps * std::max(scale_hint, 1.0);
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<std::complex<double>> z;
    bool ok = false;
    double jitter = jitter0;
    for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
      z = y;
      ok = shifted_solve(a, std::complex<double>(lr + jitter, li), z);
      jitter *= 16.0;
    }
    if (!ok) break;
    y = std::move(z);
    renorm();
  }
  int imax = 0;
  for (int i = 1; i < m; ++i)
    if (std::abs(y[i]) > std::abs(y[imax])) imax = i;
  if (std::abs(y[imax]) > 0.0) {
    const std::complex<double> phase = std::conj(y[imax]) / std::abs(y[imax]);
    for (auto& c : y) c *= phase;
  }
  return y;
}

// Thick-restart Lanczos with full reorthogonalization, for self-adjoint
// operators. Converged when every target Ritz pair has
// |beta| |s_{p,i}| <= tol * anorm, where anorm is the largest Ritz
// magnitude seen so far.
inline EigenResult solve_lanczos(const EigenRequest& req) {
  const int n = req.op->dim();
  const int k = req.k;
  int p = req.subspace > 0 ? req.subspace : std::max(2 * k + 1, 20);
  p = std::min(std::max(p, k + 1), n);

  const auto t_start = std::chrono::steady_clock::now();
  const double eps = std::numeric_limits<double>::epsilon();
  Rng rng(req.seed);
  LanczosWorkspace ws{Matrix(n, p + 1), Matrix(p, p), std::vector<double>(n),
                      std::vector<double>(p + 1)};
  EigenStats stats;

  auto apply_op = [&](const double* x, double* y) {
    req.op->apply({x, static_cast<std::size_t>(n)}, {y, static_cast<std::size_t>(n)});
    ++stats.matvecs;
  };

  auto random_unit = [&](std::span<double> v) {
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    const double nrm = norm2(v);
    if (nrm > 0.0) scale(1.0 / nrm, v);
  };

  // Orthogonalizes v against basis columns [0, count); returns the
  // surviving norm (v is left unnormalized).
  auto orthogonalize = [&](std::span<double> v, int count) {
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i < count; ++i) {
        auto qi = ws.v.col_span(i);
        axpy(-dot(qi, v), qi, v);
      }
    }
    return norm2(v);
  };

  auto fresh_direction = [&](std::span<double> v, int count) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      random_unit(v);
      const double nrm = orthogonalize(v, count);
      if (nrm > 1e-3) {
        scale(1.0 / nrm, v);
        return;
      }
    }
    throw std::runtime_error("solve: could not find a direction outside the current basis");
  };

  random_unit(ws.v.col_span(0));
  int retained = 0;        // leading basis columns carried over a restart
  double beta_last = 0.0;  // coupling of the residual direction v_p
  double anorm = 0.0;

  auto make_result = [&](const DenseEigen& ed, const std::vector<int>& order) {
    EigenResult out;
    out.values.resize(k);
    out.values_imag.assign(k, 0.0);
    out.vectors = Matrix(n, k);
    out.stats = stats;
    out.stats.residuals.resize(k);
    for (int j = 0; j < k; ++j) {
      const int idx = order[j];
      out.values[j] = ed.values[idx];
      out.stats.residuals[j] = std::abs(beta_last) * std::abs(ed.vectors(p - 1, idx));
      auto dst = out.vectors.col_span(j);
      std::fill(dst.begin(), dst.end(), 0.0);
      for (int l = 0; l < p; ++l) axpy(ed.vectors(l, idx), ws.v.col_span(l), dst);
    }
    out.stats.anorm_estimate = anorm;
    out.stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return out;
  };

  while (true) {
    // Expand the basis from column `retained` to p, measuring the
    // projected matrix entries as reorthogonalization coefficients so
    // that T = V^T A V holds to working precision even across restarts.
    for (int j = retained; j < p; ++j) {
      apply_op(ws.v.col(j), ws.w.data());
      std::fill(ws.c.begin(), ws.c.begin() + j + 1, 0.0);
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) {
          auto qi = ws.v.col_span(i);
          const double cij = dot(qi, ws.w);
          axpy(-cij, qi, ws.w);
          ws.c[i] += cij;
        }
      }
      for (int i = 0; i <= j; ++i) {
        ws.t(i, j) = ws.c[i];
        ws.t(j, i) = ws.c[i];
      }
      double col_scale = 0.0;
      for (int i = 0; i <= j; ++i) col_scale = std::max(col_scale, std::abs(ws.c[i]));
      const double beta = norm2(ws.w);
      const int next = j + 1 < p ? j + 1 : p;
      const bool breakdown = beta <= 64.0 * eps * std::max({anorm, col_scale, 1e-300});
      if (breakdown) {
        // The basis spans an invariant subspace; continue in a fresh
        // random direction with zero coupling. With the basis already
        // covering the whole space there is nothing left to add.
        if (j + 1 < p) {
          ws.t(j, j + 1) = ws.t(j + 1, j) = 0.0;
        } else {
          beta_last = 0.0;
        }
        auto dst = ws.v.col_span(next);
        if (j + 1 >= n) {
          std::fill(dst.begin(), dst.end(), 0.0);
        } else {
          fresh_direction(dst, j + 1);
        }
      } else {
        auto dst = ws.v.col_span(next);
        for (int i = 0; i < n; ++i) dst[i] = ws.w[i] / beta;
        if (j + 1 < p) {
          ws.t(j, j + 1) = ws.t(j + 1, j) = beta;
        } else {
          beta_last = beta;
        }
      }
    }

    const DenseEigen ed = dense_eigen(ws.t);
    std::vector<int> order(p);
    std::iota(order.begin(), order.end(), 0);
    if (req.which == Which::largest) std::reverse(order.begin(), order.end());
    anorm = std::max({anorm, std::abs(ed.values.front()), std::abs(ed.values.back())});

    double worst_target = 0.0;
    bool converged = true;
    for (int j = 0; j < k; ++j) {
      const double r = std::abs(beta_last) * std::abs(ed.vectors(p - 1, order[j]));
      worst_target = std::max(worst_target, r);
      if (r > req.tol * anorm) converged = false;
    }
    stats.restart_history.push_back(worst_target);

    if (converged) return make_result(ed, order);
    if (stats.restarts >= req.max_restarts) {
      EigenResult partial = make_result(ed, order);
      throw EigenConvergenceError(
          "solve: not converged after " + std::to_string(stats.restarts) +
              " restarts (worst target residual " + std::to_string(worst_target) + ")",
          std::move(partial));
    }

    // Thick restart: keep the best Ritz pairs plus the residual direction.
    const int keep = std::min(std::max(k + 1, p / 2), p - 1);
    Matrix y(n, keep);
    for (int j = 0; j < keep; ++j) {
      auto dst = y.col_span(j);
      for (int l = 0; l < p; ++l) axpy(ed.vectors(l, order[j]), ws.v.col_span(l), dst);
    }
    for (int j = 0; j < keep; ++j)
      std::copy(y.col(j), y.col(j) + n, ws.v.col(j));
    std::copy(ws.v.col(p), ws.v.col(p) + n, ws.v.col(keep));
    {
      auto vk = ws.v.col_span(keep);
      const double nrm = orthogonalize(vk, keep);
      if (nrm > 1e-3) {
        scale(1.0 / nrm, vk);
      } else {
        fresh_direction(vk, keep);
        beta_last = 0.0;
      }
    }
    for (int j = 0; j < p; ++j)
      for (int i = 0; i < p; ++i) ws.t(i, j) = 0.0;
    for (int j = 0; j < keep; ++j) ws.t(j, j) = ed.values[order[j]];
    retained = keep;
    ++stats.restarts;
  }
}

// Restarted Arnoldi with invariant-subspace locking, for operators with
// no self-adjointness to exploit. Targets are ranked by real part. Each
// cycle certifies the longest leading prefix of targets whose joint span
// is invariant to tolerance, measured inside the factorization as
// ||(I - YY^T) H Y|| plus the subdiagonal leakage term, and locks those
// directions: later Krylov steps are projected away from them, so the
// iteration cannot oscillate between competing directions and a cluster
// of close eigenvalues is captured through its well-conditioned span
// even when the individual eigenvectors are ill-conditioned. A conjugate
// pair contributes the real and imaginary parts of its eigenvector,
// which span the same invariant plane; a cluster or pair cut in half by
// the target count locks a few columns past k internally but still
// reports k values, with the imaginary split recorded in values_imag.
// Once k values are locked the returned eigenpairs are recomputed from
// the projection of the operator onto the locked basis, whose measured
// operator images make the final subspace residual ||A Q - Q S|| exact;
// acceptance gates on it because per-vector residuals inside a cluster
// hit a conditioning floor no iteration can cross.
inline EigenResult solve_arnoldi(const EigenRequest& req) {
  const int n = req.op->dim();
  const int k = req.k;
  const int kcap = std::min(k + 3, n);  // room for a cluster straddling k
  int m = req.subspace > 0 ? req.subspace : std::max(3 * k + 8, 30);
  m = std::min(std::max(m, k + 2), n);

  const auto t_start = std::chrono::steady_clock::now();
  const double eps = std::numeric_limits<double>::epsilon();
  Rng rng(req.seed);
  Matrix v(n, m + 1);
  Matrix h(m + 1, m);
  Matrix qlock(n, kcap);   // locked orthonormal directions
  Matrix aqlock(n, kcap);  // operator image of each locked column
  std::vector<std::complex<double>> lock_vals;
  std::vector<double> lock_res;
  int nlock = 0;
  std::vector<double> w(n), c(m + 1);
  EigenStats stats;

  auto apply_op = [&](const double* x, double* y) {
    req.op->apply({x, static_cast<std::size_t>(n)}, {y, static_cast<std::size_t>(n)});
    ++stats.matvecs;
  };

  auto random_unit = [&](std::span<double> dst) {
    for (double& x : dst) x = rng.uniform(-1.0, 1.0);
    const double nrm = norm2(dst);
    if (nrm > 0.0) scale(1.0 / nrm, dst);
  };

  // removes the locked directions and the first `count` basis columns
  auto orthogonalize = [&](std::span<double> dst, int count) {
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i < nlock; ++i) {
        auto qi = qlock.col_span(i);
        axpy(-dot(qi, dst), qi, dst);
      }
      for (int i = 0; i < count; ++i) {
        auto qi = v.col_span(i);
        axpy(-dot(qi, dst), qi, dst);
      }
    }
    return norm2(dst);
  };

  auto fresh_direction = [&](std::span<double> dst, int count) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      random_unit(dst);
      const double nrm = orthogonalize(dst, count);
      if (nrm > 1e-3) {
        scale(1.0 / nrm, dst);
        return;
      }
    }
    throw std::runtime_error("solve: could not find a direction outside the current basis");
  };

  random_unit(v.col_span(0));
  double anorm = 0.0;

  while (true) {
    if (nlock >= k) {
      // Rayleigh-Ritz over the locked basis. The locked columns carry
      // their operator images, so s = Q^T A Q and the subspace residual
      // columns A Q - Q S cost only dot products. Q^T (A Q - Q S) = 0,
      // so per-vector residuals split exactly into an in-span part from
      // the small problem and the out-of-span part ||resid * g||.
      const int p = nlock;
      Matrix s(p, p);
      for (int j = 0; j < p; ++j)
        for (int i = 0; i < p; ++i) s(i, j) = dot(qlock.col_span(i), aqlock.col_span(j));
      Matrix resid(n, p);
      double worst_lock = 0.0;
      for (int j = 0; j < p; ++j) {
        auto rj = resid.col_span(j);
        std::copy(aqlock.col(j), aqlock.col(j) + n, rj.begin());
        for (int l = 0; l < p; ++l) axpy(-s(l, j), qlock.col_span(l), rj);
        worst_lock = std::max(worst_lock, norm2(rj));
      }

      auto spec = general_spectrum(s);
      std::sort(spec.begin(), spec.end(),
                [&](const std::complex<double>& x, const std::complex<double>& y) {
                  if (x.real() != y.real())
                    return req.which == Which::largest ? x.real() > y.real()
                                                       : x.real() < y.real();
                  return x.imag() > y.imag();
                });
      for (const auto& z : spec) anorm = std::max(anorm, std::abs(z));

      Matrix vecs(n, k);
      std::vector<double> vals(k), vims(k), rests(k);
      for (int j = 0; j < k; ++j) {
        vals[j] = spec[j].real();
        vims[j] = spec[j].imag();
      }
      std::vector<double> gre(p), gim(p), t1(p), t2(p);
      for (int j = 0; j < k; ++j) {
        if (j > 0 && vims[j - 1] > 0.0 && vals[j] == vals[j - 1] && vims[j] == -vims[j - 1]) {
          rests[j] = rests[j - 1];  // partner column written by the pair branch
          continue;
        }
        const auto y = detail::inverse_iteration_vec(s, vals[j], vims[j], anorm);
        for (int l = 0; l < p; ++l) {
          gre[l] = y[l].real();
          gim[l] = y[l].imag();
        }
        // Q has orthonormal columns, so Gram-Schmidt on coefficient
        // vectors is Gram-Schmidt on the big-space columns.
        double nrm = norm2(gre);
        if (nrm > 0.0) scale(1.0 / nrm, std::span<double>(gre));
        const bool complex_val = vims[j] != 0.0;
        if (complex_val) {
          for (int pass = 0; pass < 2; ++pass)
            axpy(-dot(gre, gim), std::span<const double>(gre), std::span<double>(gim));
          nrm = norm2(gim);
          if (nrm > 0.0) scale(1.0 / nrm, std::span<double>(gim));
        }

        auto build_col = [&](std::span<const double> g, std::span<double> dst) {
          std::fill(dst.begin(), dst.end(), 0.0);
          for (int l = 0; l < p; ++l) axpy(g[l], qlock.col_span(l), dst);
        };
        build_col(gre, vecs.col_span(j));
        const bool partner_in =
            complex_val && j + 1 < k && vals[j + 1] == vals[j] && vims[j + 1] == -vims[j];
        if (partner_in) build_col(gim, vecs.col_span(j + 1));

        // residual of the returned column (for a pair, of its plane):
        // in-span defect through s plus the out-of-span leakage
        auto column_res = [&](std::span<const double> g, std::span<const double> other,
                              bool pair) {
          for (int i = 0; i < p; ++i) {
            double acc = 0.0;
            for (int l = 0; l < p; ++l) acc += s(i, l) * g[l];
            t1[i] = acc;
          }
          double in_span = 0.0;
          if (!pair) {
            axpy(-vals[j], g, std::span<double>(t1));
            in_span = norm2(std::span<double>(t1));
          } else {
            const double b11 = dot(g, t1), b21 = dot(other, std::span<const double>(t1));
            axpy(-b11, g, std::span<double>(t1));
            axpy(-b21, other, std::span<double>(t1));
            in_span = norm2(std::span<double>(t1));
          }
          for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int l = 0; l < p; ++l) acc += resid(i, l) * g[l];
            w[i] = acc;
          }
          return std::hypot(in_span, norm2(std::span<double>(w)));
        };
        if (complex_val) {
          const double r = std::max(column_res(gre, gim, true), column_res(gim, gre, true));
          rests[j] = r;
          if (partner_in) rests[j + 1] = r;
        } else {
          rests[j] = column_res(gre, gre, false);
        }
      }

      auto assemble = [&] {
        EigenResult out;
        out.values = std::move(vals);
        out.values_imag = std::move(vims);
        out.vectors = std::move(vecs);
        out.stats = stats;
        out.stats.residuals = std::move(rests);
        out.stats.anorm_estimate = anorm;
        out.stats.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        return out;
      };

      if (worst_lock <= 10.0 * req.tol * std::max(anorm, 1e-300)) return assemble();
      if (stats.restarts >= req.max_restarts)
        throw EigenConvergenceError(
            "solve: not converged after " + std::to_string(stats.restarts) +
                " restarts (worst target residual " + std::to_string(worst_lock) + ")",
            assemble());
      // locking drifted with budget left: unlock and resume from the
      // best current guess
      nlock = 0;
      lock_vals.clear();
      lock_res.clear();
      auto v0 = v.col_span(0);
      std::copy(vecs.col(0), vecs.col(0) + n, v0.begin());
      const double nrm = norm2(v0);
      if (nrm > 1e-12) {
        scale(1.0 / nrm, v0);
      } else {
        random_unit(v0);
      }
      ++stats.restarts;
      continue;
    }

    // Arnoldi factorization in the orthogonal complement of the locked
    // basis: A V_ma = V_ma H + beta v_ma e^T up to locked components,
    // with H built from measured coefficients.
    const int ma = std::min(m, n - nlock);
    for (int j = 0; j < ma; ++j) {
      apply_op(v.col(j), w.data());
      std::fill(c.begin(), c.begin() + j + 1, 0.0);
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i < nlock; ++i) {
          auto qi = qlock.col_span(i);
          axpy(-dot(qi, w), qi, std::span<double>(w));
        }
        for (int i = 0; i <= j; ++i) {
          auto qi = v.col_span(i);
          const double cij = dot(qi, w);
          axpy(-cij, qi, std::span<double>(w));
          c[i] += cij;
        }
      }
      for (int i = 0; i <= j; ++i) h(i, j) = c[i];
      double col_scale = 0.0;
      for (int i = 0; i <= j; ++i) col_scale = std::max(col_scale, std::abs(c[i]));
      const double beta = norm2(w);
      auto dst = v.col_span(j + 1);
      if (beta <= 64.0 * eps * std::max({anorm, col_scale, 1e-300})) {
        h(j + 1, j) = 0.0;
        if (j + 1 >= n - nlock) {
          std::fill(dst.begin(), dst.end(), 0.0);
        } else {
          fresh_direction(dst, j + 1);
        }
      } else {
        h(j + 1, j) = beta;
        for (int i = 0; i < n; ++i) dst[i] = w[i] / beta;
      }
    }

    Matrix hm(ma, ma);
    for (int j = 0; j < ma; ++j)
      for (int i = 0; i < ma; ++i) hm(i, j) = h(i, j);
    std::vector<double> wr, wi;
    hessenberg_spectrum(hm, wr, wi);
    const double beta_m = h(ma, ma - 1);

    std::vector<int> order(ma);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
      if (wr[x] != wr[y]) return req.which == Which::largest ? wr[x] > wr[y] : wr[x] < wr[y];
      return wi[x] > wi[y];
    });
    for (int i = 0; i < ma; ++i) anorm = std::max(anorm, std::hypot(wr[i], wi[i]));
    for (const auto& z : lock_vals) anorm = std::max(anorm, std::abs(z));

    // One inverse-iteration eigenvector per leading target; a pair whose
    // second half would fall just outside the target count is pulled in
    // whole. `pair` means the partner sits adjacent and shares the plane.
    struct Target {
      int idx = 0;
      bool pair = false;
      int values = 1;  // spectrum values this target accounts for
      std::vector<std::complex<double>> y;
      double res = 0.0;
    };
    std::vector<Target> targets;
    const int want = k - nlock;
    int spent = 0;  // sorted Ritz indices consumed
    auto add_target = [&](int j) {
      Target t;
      t.idx = order[j];
      t.y = detail::inverse_iteration_vec(hm, wr[t.idx], wi[t.idx], anorm);
      t.res = std::abs(beta_m) * std::abs(t.y[ma - 1]);
      spent = j + 1;
      if (wi[t.idx] > 0.0 && j + 1 < ma && wr[order[j + 1]] == wr[t.idx] &&
          wi[order[j + 1]] == -wi[t.idx]) {
        t.pair = true;
        t.values = 2;
        spent = j + 2;
      } else if (wi[t.idx] != 0.0) {
        t.values = 2;  // a lone complex target still locks its whole plane
      }
      targets.push_back(std::move(t));
    };
    {
      int have = 0;
      for (int j = 0; j < ma && have < want; j = spent) {
        add_target(j);
        have += targets.back().values;
      }
    }
    const std::size_t n_want_targets = targets.size();
    double worst_target = 0.0;
    for (const Target& t : targets) worst_target = std::max(worst_target, t.res);
    stats.restart_history.push_back(worst_target);

    // A cluster straddling the target count blocks certification of the
    // last prefix unless its tail is pulled in too; extend while the gap
    // to the next Ritz value stays small and lock capacity allows.
    {
      int cols = 0;
      for (const Target& t : targets) cols += t.values;
      const double cluster_gap = 1e-2 * std::max(1.0, anorm);
      while (spent < ma && cols < kcap - nlock) {
        const double last_re = wr[targets.back().idx];
        const double next_re = wr[order[spent]];
        if (std::abs(last_re - next_re) > cluster_gap) break;
        add_target(spent);
        cols += targets.back().values;
      }
    }

    // Certify leading prefixes: orthonormalize the targets' small-space
    // directions column by column and measure the invariant-subspace
    // residual ||(I - YY^T) H Y|| plus subdiagonal leakage, column-wise.
    // The longest prefix under tolerance gets locked whole; this is what
    // captures clusters whose individual eigenvectors stall.
    std::size_t lockable = 0;  // targets certified for locking
    int lock_cols = 0;
    {
      Matrix ybasis(ma, kcap - nlock);
      int cols = 0;
      bool degenerate = false;
      std::vector<double> ycol(ma), hy(ma);
      for (std::size_t t_i = 0; t_i < targets.size() && !degenerate; ++t_i) {
        const Target& t = targets[t_i];
        if (nlock + cols + t.values > kcap) break;
        for (int part = 0; part < t.values; ++part) {
          for (int l = 0; l < ma; ++l)
            ycol[l] = part == 0 ? t.y[l].real() : t.y[l].imag();
          std::span<double> dst(ycol);
          for (int pass = 0; pass < 2; ++pass)
            for (int i = 0; i < cols; ++i)
              axpy(-dot(ybasis.col_span(i), dst), ybasis.col_span(i), dst);
          const double nrm = norm2(dst);
          if (nrm <= 1e-8) {
            degenerate = true;
            break;
          }
          scale(1.0 / nrm, dst);
          std::copy(ycol.begin(), ycol.end(), ybasis.col(cols));
          ++cols;
        }
        if (degenerate) break;
        double prefix_res = 0.0;
        for (int cc = 0; cc < cols; ++cc) {
          for (int i = 0; i < ma; ++i) {
            double acc = 0.0;
            for (int l = 0; l < ma; ++l) acc += hm(i, l) * ybasis(l, cc);
            hy[i] = acc;
          }
          std::span<double> hspan(hy);
          for (int i = 0; i < cols; ++i)
            axpy(-dot(ybasis.col_span(i), hspan), ybasis.col_span(i), hspan);
          const double leak = std::abs(beta_m) * std::abs(ybasis(ma - 1, cc));
          prefix_res = std::max(prefix_res, std::hypot(norm2(hspan), leak));
        }
        if (prefix_res <= req.tol * anorm) {
          lockable = t_i + 1;
          lock_cols = cols;
        }
      }
      for (int cc = 0; cc < lock_cols; ++cc) {
        auto dst = qlock.col_span(nlock);
        std::fill(dst.begin(), dst.end(), 0.0);
        for (int l = 0; l < ma; ++l) axpy(ybasis(l, cc), v.col_span(l), dst);
        // the big-space column inherits orthonormality from ybasis; one
        // cleanup pass against the previously locked directions
        for (int i = 0; i < nlock; ++i) {
          auto qi = qlock.col_span(i);
          axpy(-dot(qi, dst), qi, dst);
        }
        const double nrm = norm2(dst);
        if (nrm <= 1e-8) {
          lock_cols = cc;  // keep what is locked so far, drop the rest
          break;
        }
        scale(1.0 / nrm, dst);
        apply_op(dst.data(), aqlock.col(nlock));
        ++nlock;
      }
      // align to whole targets: a truncated pair would desynchronize the
      // value log from the locked columns
      {
        int aligned = 0;
        for (std::size_t t_i = 0; t_i < lockable; ++t_i) {
          if (aligned + targets[t_i].values > lock_cols) break;
          aligned += targets[t_i].values;
        }
        nlock -= lock_cols - aligned;
        lock_cols = aligned;
      }
      int vals_logged = 0;
      for (std::size_t t_i = 0; t_i < lockable && vals_logged < lock_cols; ++t_i) {
        const Target& t = targets[t_i];
        if (wi[t.idx] == 0.0) {
          lock_vals.emplace_back(wr[t.idx], 0.0);
          lock_res.push_back(t.res);
          ++vals_logged;
        } else {
          const double split = std::abs(wi[t.idx]);
          lock_vals.emplace_back(wr[t.idx], split);
          lock_vals.emplace_back(wr[t.idx], -split);
          lock_res.push_back(t.res);
          lock_res.push_back(t.res);
          vals_logged += 2;
        }
      }
    }

    // A target whose estimate stalls just above tolerance may already be
    // converged: once the cycle starts from a nearly invariant vector,
    // the trailing eigenvector component feeding the estimate drops
    // below what inverse iteration on the small problem resolves.
    // Candidates in that band get the residual measured through the
    // operator and lock on the measured value.
    std::size_t confirmed = lockable;
    while (confirmed < targets.size() && nlock < k) {
      const Target& t = targets[confirmed];
      if (t.res > 1e4 * req.tol * anorm || nlock + t.values > kcap) break;
      const int base = nlock;
      bool built = true;
      for (int part = 0; part < t.values && built; ++part) {
        auto dst = qlock.col_span(base + part);
        std::fill(dst.begin(), dst.end(), 0.0);
        for (int l = 0; l < ma; ++l)
          axpy(part == 0 ? t.y[l].real() : t.y[l].imag(), v.col_span(l), dst);
        for (int pass = 0; pass < 2; ++pass)
          for (int i = 0; i < base + part; ++i) {
            auto qi = qlock.col_span(i);
            axpy(-dot(qi, dst), qi, dst);
          }
        const double nrm = norm2(dst);
        if (nrm <= 1e-8) {
          built = false;
        } else {
          scale(1.0 / nrm, dst);
        }
      }
      if (!built) break;
      for (int part = 0; part < t.values; ++part)
        apply_op(qlock.col(base + part), aqlock.col(base + part));
      double measured = 0.0;
      for (int part = 0; part < t.values; ++part) {
        std::copy(aqlock.col(base + part), aqlock.col(base + part) + n, w.begin());
        std::span<double> ws(w);
        for (int i = 0; i < base + t.values; ++i) {
          auto qi = qlock.col_span(i);
          axpy(-dot(qi, ws), qi, ws);
        }
        measured = std::max(measured, norm2(ws));
      }
      if (measured > req.tol * anorm) break;
      if (wi[t.idx] == 0.0) {
        lock_vals.emplace_back(wr[t.idx], 0.0);
        lock_res.push_back(measured);
      } else {
        const double split = std::abs(wi[t.idx]);
        lock_vals.emplace_back(wr[t.idx], split);
        lock_vals.emplace_back(wr[t.idx], -split);
        lock_res.push_back(measured);
        lock_res.push_back(measured);
      }
      nlock += t.values;
      ++confirmed;
    }
    if (nlock >= k) continue;

    if (stats.restarts >= req.max_restarts) {
      // partial result: locked columns first, then the best remaining
      // Ritz directions from the current cycle
      Matrix vecs(n, k);
      std::vector<double> vals(k), vims(k), rests(k);
      int col = 0;
      for (; col < nlock && col < k; ++col) {
        std::copy(qlock.col(col), qlock.col(col) + n, vecs.col(col));
        vals[col] = lock_vals[col].real();
        vims[col] = lock_vals[col].imag();
        rests[col] = lock_res[col];
      }
      for (std::size_t j = confirmed; j < n_want_targets && col < k; ++j) {
        const Target& t = targets[j];
        auto dst = vecs.col_span(col);
        std::fill(dst.begin(), dst.end(), 0.0);
        for (int l = 0; l < ma; ++l) axpy(t.y[l].real(), v.col_span(l), dst);
        double nrm = norm2(dst);
        if (nrm > 0.0) scale(1.0 / nrm, dst);
        vals[col] = wr[t.idx];
        vims[col] = wi[t.idx];
        rests[col] = t.res;
        ++col;
        if (t.pair && col < k) {
          auto dimc = vecs.col_span(col);
          std::fill(dimc.begin(), dimc.end(), 0.0);
          for (int l = 0; l < ma; ++l) axpy(t.y[l].imag(), v.col_span(l), dimc);
          auto prev = vecs.col_span(col - 1);
          for (int pass = 0; pass < 2; ++pass) axpy(-dot(prev, dimc), prev, dimc);
          nrm = norm2(dimc);
          if (nrm > 0.0) scale(1.0 / nrm, dimc);
          vals[col] = wr[t.idx];
          vims[col] = -wi[t.idx];
          rests[col] = t.res;
          ++col;
        }
      }
      EigenResult out;
      out.values = std::move(vals);
      out.values_imag = std::move(vims);
      out.vectors = std::move(vecs);
      out.stats = stats;
      out.stats.residuals = std::move(rests);
      out.stats.anorm_estimate = anorm;
      out.stats.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
      throw EigenConvergenceError(
          "solve: not converged after " + std::to_string(stats.restarts) +
              " restarts (worst target residual " + std::to_string(worst_target) + ")",
          std::move(out));
    }

    // restart chasing the first unconfirmed target; built in scratch
    // because the combination reads every basis column, including the
    // one it replaces
    std::fill(w.begin(), w.end(), 0.0);
    if (confirmed < targets.size()) {
      const Target& t = targets[confirmed];
      for (int l = 0; l < ma; ++l)
        axpy(t.y[l].real() + t.y[l].imag(), v.col_span(l), std::span<double>(w));
    }
    auto v0 = v.col_span(0);
    std::copy(w.begin(), w.end(), v0.begin());
    const double nrm = orthogonalize(v0, 0);
    if (nrm > 1e-12) {
      scale(1.0 / nrm, v0);
    } else {
      fresh_direction(v0, 0);
    }
    ++stats.restarts;
  }
}

}  // namespace detail

// Computes the k extreme eigenpairs of a linear operator. Self-adjoint
// operators go through thick-restart Lanczos; anything else through
// explicitly restarted Arnoldi, which ranks by real part. Restart and
// matvec counts are part of the result, not debug output: comparing them
// across operators is half the point of this library.
inline EigenResult solve(const EigenRequest& req) {
  if (req.op == nullptr) throw std::invalid_argument("solve: no operator");
  const int n = req.op->dim();
  if (req.k < 1 || req.k > n)
    throw std::invalid_argument("solve: k must be in [1, dim]");
  if (!(req.tol > 0.0)) throw std::invalid_argument("solve: tol must be positive");
  if (req.max_restarts < 0) throw std::invalid_argument("solve: max_restarts must be >= 0");
  return req.op->self_adjoint() ? detail::solve_lanczos(req) : detail::solve_arnoldi(req);
}

struct GapReport {
  double lambda_k = 0.0;
  double lambda_k1 = 0.0;
  double gap = 0.0;      // separation between the k-th and (k+1)-th value
  double rel_gap = 0.0;  // gap over the spread of the non-target spectrum
  std::vector<double> extremes;  // the k+1 computed values, target order
  EigenStats stats;
};

// Computes the eigengap behind a k-dimensional invariant subspace by
// solving for k+1 pairs, plus a cheap opposite-end estimate so the gap
// can be reported relative to the spectrum the solver must sweep. For
// operators that are not self-adjoint the gap is between real parts.
inline GapReport eigen_gap_report(const LinearOperator& op, int k, Which which,
                                  double tol = 1e-8, std::uint64_t seed = 0) {
  if (k < 1 || k + 1 > op.dim())
    throw std::invalid_argument("eigen_gap_report: need 1 <= k < dim");
  EigenRequest req;
  req.op = &op;
  req.k = k + 1;
  req.which = which;
  req.tol = tol;
  req.seed = seed;
  EigenResult res = solve(req);

  EigenRequest opp = req;
  opp.k = 1;
  opp.which = which == Which::largest ? Which::smallest : Which::largest;
  opp.tol = std::max(tol, 1e-4);
  opp.seed = mix_seed(seed ^ 0x9a95b9ce56c65fceULL);
  EigenResult far_end = solve(opp);
  const double opposite = far_end.values[0];

  GapReport rep;
  rep.extremes = res.values;
  rep.lambda_k = res.values[k - 1];
  rep.lambda_k1 = res.values[k];
  rep.gap = std::abs(rep.lambda_k1 - rep.lambda_k);
  const double spread = which == Which::largest ? rep.lambda_k1 - opposite
                                                : opposite - rep.lambda_k1;
  if (spread > 0.0) {
    rep.rel_gap = rep.gap / spread;
  } else {
    rep.rel_gap = rep.gap > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  rep.stats = res.stats;
  rep.stats.matvecs += far_end.stats.matvecs;
  return rep;
}

}  // namespace fsc
