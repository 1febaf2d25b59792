#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "fsc/dense.hpp"
#include "fsc/rng.hpp"

namespace fsc {

struct Assignment {
  std::vector<int> labels;
  int k = 0;
};

struct KmeansOptions {
  int max_iter = 300;
  int restarts = 10;
  double move_tol = 1e-9;
  bool normalize_rows = false;
};

struct KmeansInfo {
  double wcss = 0.0;
  int iterations = 0;
  int empty_repairs = 0;
  int restarts_run = 0;
};

namespace detail {

struct KmeansRun {
  std::vector<int> labels;
  double wcss = std::numeric_limits<double>::infinity();
  int iterations = 0;
  int empty_repairs = 0;
};

inline double sq_dist(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int j = 0; j < d; ++j) {
    const double diff = a[j] - b[j];
    s += diff * diff;
  }
  return s;
}

inline KmeansRun lloyd_once(const std::vector<double>& pts, int n, int d, int k, Rng rng,
                            const KmeansOptions& opt) {
  KmeansRun run;
  std::vector<double> centers(static_cast<std::size_t>(k) * d, 0.0);
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());

  // k-means++ seeding: first center uniform, the rest proportional to the
  // squared distance from the nearest already-chosen center.
  int first = static_cast<int>(rng.index(n));
  std::copy(&pts[static_cast<std::size_t>(first) * d], &pts[static_cast<std::size_t>(first) * d] + d,
            centers.begin());
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d2 = sq_dist(&pts[static_cast<std::size_t>(i) * d],
                                &centers[static_cast<std::size_t>(c - 1) * d], d);
      min_d2[i] = std::min(min_d2[i], d2);
      total += min_d2[i];
    }
    int pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (int i = 0; i < n; ++i) {
        acc += min_d2[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<int>(rng.index(n));
    }
    std::copy(&pts[static_cast<std::size_t>(pick) * d],
              &pts[static_cast<std::size_t>(pick) * d] + d,
              centers.begin() + static_cast<std::size_t>(c) * d);
  }

  run.labels.assign(n, 0);
  std::vector<double> next(centers.size());
  std::vector<int> counts(k);
  for (int it = 0; it < opt.max_iter; ++it) {
    run.iterations = it + 1;
    for (int i = 0; i < n; ++i) {
      const double* x = &pts[static_cast<std::size_t>(i) * d];
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int c = 0; c < k; ++c) {
        const double d2 = sq_dist(x, &centers[static_cast<std::size_t>(c) * d], d);
        if (d2 < best) {
          best = d2;
          arg = c;
        }
      }
      run.labels[i] = arg;
    }
    std::fill(next.begin(), next.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < n; ++i) {
      const int c = run.labels[i];
      ++counts[c];
      const double* x = &pts[static_cast<std::size_t>(i) * d];
      double* m = &next[static_cast<std::size_t>(c) * d];
      for (int j = 0; j < d; ++j) m[j] += x[j];
    }
    // Empty-cluster repair: reseed at the point farthest from its center.
    std::vector<char> taken(n, 0);
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      double worst = -1.0;
      int arg = -1;
      for (int i = 0; i < n; ++i) {
        if (taken[i] || counts[run.labels[i]] <= 1) continue;
        const double d2 = sq_dist(&pts[static_cast<std::size_t>(i) * d],
                                  &centers[static_cast<std::size_t>(run.labels[i]) * d], d);
        if (d2 > worst) {
          worst = d2;
          arg = i;
        }
      }
      if (arg < 0) continue;
      taken[arg] = 1;
      const int old = run.labels[arg];
      const double* x = &pts[static_cast<std::size_t>(arg) * d];
      double* m_old = &next[static_cast<std::size_t>(old) * d];
      double* m_new = &next[static_cast<std::size_t>(c) * d];
      for (int j = 0; j < d; ++j) {
        m_old[j] -= x[j];
        m_new[j] += x[j];
      }
      --counts[old];
      counts[c] = 1;
      run.labels[arg] = c;
      ++run.empty_repairs;
    }
    double moved2 = 0.0;
    for (int c = 0; c < k; ++c) {
      double* m = &next[static_cast<std::size_t>(c) * d];
      if (counts[c] > 0)
        for (int j = 0; j < d; ++j) m[j] /= counts[c];
      moved2 = std::max(moved2, sq_dist(m, &centers[static_cast<std::size_t>(c) * d], d));
    }
    centers.swap(next);
    if (moved2 <= opt.move_tol * opt.move_tol) break;
  }

  run.wcss = 0.0;
  for (int i = 0; i < n; ++i)
    run.wcss += sq_dist(&pts[static_cast<std::size_t>(i) * d],
                        &centers[static_cast<std::size_t>(run.labels[i]) * d], d);
  return run;
}

}  // namespace detail

// Lloyd's algorithm with k-means++ seeding and several restarts; the run
// with the lowest within-cluster sum of squares wins. Rows of `points`
// are the samples. Fully deterministic for a given seed.
inline Assignment kmeans(const Matrix& points, int k, std::uint64_t seed,
                         const KmeansOptions& opt = {}, KmeansInfo* info = nullptr) {
  const int n = points.rows();
  const int d = points.cols();
  if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
  if (n < k) throw std::invalid_argument("kmeans: fewer points than clusters");
  if (d < 1) throw std::invalid_argument("kmeans: points have no coordinates");
  std::vector<double> pts(static_cast<std::size_t>(n) * d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) pts[static_cast<std::size_t>(i) * d + j] = points(i, j);
  if (opt.normalize_rows) {
    for (int i = 0; i < n; ++i) {
      double* x = &pts[static_cast<std::size_t>(i) * d];
      double nrm = 0.0;
      for (int j = 0; j < d; ++j) nrm += x[j] * x[j];
      nrm = std::sqrt(nrm);
      if (nrm > 0.0)
        for (int j = 0; j < d; ++j) x[j] /= nrm;
    }
  }

  Rng base(seed);
  detail::KmeansRun best;
  const int tries = std::max(1, opt.restarts);
  for (int r = 0; r < tries; ++r) {
    detail::KmeansRun run = detail::lloyd_once(pts, n, d, k, base.fork(r), opt);
    if (run.wcss < best.wcss) best = std::move(run);
  }
  if (info) {
    info->wcss = best.wcss;
    info->iterations = best.iterations;
    info->empty_repairs = best.empty_repairs;
    info->restarts_run = tries;
  }
  return {std::move(best.labels), k};
}

namespace detail {

// Minimum-cost perfect assignment on a square cost matrix (potentials /
// shortest augmenting path). Returns the column matched to each row.
inline std::vector<int> min_cost_assignment(const Matrix& cost) {
  const int n = cost.rows();
  if (cost.cols() != n) throw std::invalid_argument("min_cost_assignment: matrix not square");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> match(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) match[p[j] - 1] = j - 1;
  return match;
}

inline Matrix confusion_matrix(const Assignment& a, const Assignment& truth, int k) {
  Matrix m(k, k);
  for (std::size_t i = 0; i < a.labels.size(); ++i) m(a.labels[i], truth.labels[i]) += 1.0;
  return m;
}

inline double error_from_agreement(double agreement, std::size_t n) {
  return 1.0 - agreement / static_cast<double>(n);
}

inline double clustering_error_exhaustive(const Assignment& a, const Assignment& truth, int k) {
  const Matrix m = confusion_matrix(a, truth, k);
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0.0;
  do {
    double agree = 0.0;
    for (int i = 0; i < k; ++i) agree += m(i, perm[i]);
    best = std::max(best, agree);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return error_from_agreement(best, a.labels.size());
}

inline double clustering_error_hungarian(const Assignment& a, const Assignment& truth, int k) {
  const Matrix m = confusion_matrix(a, truth, k);
  Matrix cost(k, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i) cost(i, j) = -m(i, j);
  const auto match = min_cost_assignment(cost);
  double agree = 0.0;
  for (int i = 0; i < k; ++i) agree += m(i, match[i]);
  return error_from_agreement(agree, a.labels.size());
}

}  // namespace detail

// Fraction of misassigned vertices under the best relabeling of `a` onto
// `truth`. Exhaustive over label bijections for small k, Hungarian
// matching beyond that; both routes agree and tests hold them to it.
inline double clustering_error(const Assignment& a, const Assignment& truth) {
  if (a.labels.size() != truth.labels.size())
    throw std::invalid_argument("clustering_error: label vectors differ in length");
  if (a.labels.empty()) throw std::invalid_argument("clustering_error: empty labeling");
  if (truth.k > a.k)
    throw std::invalid_argument("clustering_error: ground truth uses more labels than k");
  const int k = a.k;
  for (int x : a.labels)
    if (x < 0 || x >= k) throw std::invalid_argument("clustering_error: label out of range");
  for (int x : truth.labels)
    if (x < 0 || x >= truth.k)
      throw std::invalid_argument("clustering_error: truth label out of range");
  if (k <= 8) return detail::clustering_error_exhaustive(a, truth, k);
  return detail::clustering_error_hungarian(a, truth, k);
}

}  // namespace fsc
