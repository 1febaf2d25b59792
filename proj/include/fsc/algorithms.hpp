#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fsc/cluster.hpp"
#include "fsc/dense.hpp"
#include "fsc/dense_eigen.hpp"
#include "fsc/eigensolve.hpp"
#include "fsc/fairness.hpp"
#include "fsc/graph.hpp"
#include "fsc/operators.hpp"

namespace fsc {

struct Timings {
  double total_s = 0.0;
  double eigensolver_s = 0.0;
  double kmeans_s = 0.0;
};

struct ClusteringResult {
  std::string algorithm;
  std::string variant;  // sym/rw/aff for the projected-operator family, else empty
  Assignment assignment;
  Matrix embedding;
  std::vector<double> eigenvalues;
  double average_balance = 0.0;
  double min_balance = 0.0;
  double ncut = 0.0;
  bool empty_cluster = false;
  std::optional<double> error;
  double constraint_residual = 0.0;
  Timings timings;
  int restarts = 0;
  std::uint64_t matvecs = 0;
  KmeansInfo kmeans_info;
};

struct PipelineOptions {
  double tol = 1e-8;
  double sigma = 3.0;
  int dense_limit = 3000;
  int max_restarts = 1000;
  int subspace = 0;  // 0: solver default
  KmeansOptions kmeans;
  const Assignment* ground_truth = nullptr;
};

// Sum over clusters of cut(C, V \ C) / vol(C). Clusters that are empty or
// have zero volume contribute nothing and raise the skipped flag.
inline double ncut_value(const Graph& g, std::span<const int> labels, int k,
                         bool* skipped_degenerate = nullptr) {
  if (static_cast<int>(labels.size()) != g.order())
    throw std::invalid_argument("ncut_value: label count differs from graph order");
  if (k < 1) throw std::invalid_argument("ncut_value: k must be >= 1");
  std::vector<double> cut(k, 0.0), vol(k, 0.0);
  std::vector<long long> size(k, 0);
  for (int u = 0; u < g.order(); ++u) {
    const int c = labels[u];
    if (c < 0 || c >= k) throw std::invalid_argument("ncut_value: label out of range");
    vol[c] += g.degrees()[u];
    ++size[c];
    const auto nbrs = g.neighbors(u);
    const auto wts = g.weights(u);
    for (std::size_t i = 0; i < nbrs.size(); ++i)
      if (labels[nbrs[i]] != c) cut[c] += wts[i];
  }
  double acc = 0.0;
  bool skipped = false;
  for (int c = 0; c < k; ++c) {
    if (size[c] == 0 || vol[c] <= 0.0) {
      skipped = true;
      continue;
    }
    acc += cut[c] / vol[c];
  }
  if (skipped_degenerate) *skipped_degenerate = skipped;
  return acc;
}

namespace detail {

inline std::uint64_t eig_seed(std::uint64_t seed) { return mix_seed(seed ^ 0x65696773ULL); }
inline std::uint64_t km_seed(std::uint64_t seed) { return mix_seed(seed ^ 0x6b6d6e73ULL); }

// Removes the range(F) component from every embedding column. The exact
// eigenvectors already live in ker(F^T); this pins the computed ones to
// it as well, so the fairness residual reflects the formulation rather
// than the eigensolver tolerance.
inline void project_to_constraint_kernel(const ConstraintMatrix& f, Matrix& h) {
  const Matrix q = orthonormal_range(f.dense());
  std::vector<double> qt(q.cols());
  for (int j = 0; j < h.cols(); ++j) {
    auto col = h.col_span(j);
    matvec_t(q, col, qt);
    for (int l = 0; l < q.cols(); ++l) axpy(-qt[l], q.col_span(l), col);
  }
}

inline ClusteringResult finalize(std::string algorithm, std::string variant, const Graph& g,
                                 const GroupPartition& gp, const ConstraintMatrix* f, int k,
                                 std::uint64_t seed, const PipelineOptions& opt, Matrix embedding,
                                 std::vector<double> eigenvalues, double eig_seconds, int restarts,
                                 std::uint64_t matvecs,
                                 std::chrono::steady_clock::time_point t0) {
  ClusteringResult res;
  res.algorithm = std::move(algorithm);
  res.variant = std::move(variant);
  res.eigenvalues = std::move(eigenvalues);
  res.timings.eigensolver_s = eig_seconds;
  res.restarts = restarts;
  res.matvecs = matvecs;

  const auto t_km = std::chrono::steady_clock::now();
  res.assignment = kmeans(embedding, k, km_seed(seed), opt.kmeans, &res.kmeans_info);
  res.timings.kmeans_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_km).count();

  res.embedding = std::move(embedding);
  res.average_balance = average_balance(res.assignment.labels, k, gp);
  res.min_balance = min_cluster_balance(res.assignment.labels, k, gp);
  res.ncut = ncut_value(g, res.assignment.labels, k, &res.empty_cluster);
  if (f != nullptr) res.constraint_residual = constraint_residual(*f, res.embedding);
  if (opt.ground_truth != nullptr && opt.ground_truth->k <= k)
    res.error = clustering_error(res.assignment, *opt.ground_truth);
  res.timings.total_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace detail

// Plain normalized spectral clustering: k-means on the smallest-k
// eigenvectors of L_sym, reached through the shifted similarity operator
// I + D^{-1/2} W D^{-1/2} so the iterative solver can run in largest mode.
inline ClusteringResult standard_sc(const Graph& g, const GroupPartition& gp, int k,
                                    std::uint64_t seed, const PipelineOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  GOperator op(g, GVariant::sym, 1.0);
  EigenRequest req;
  req.op = &op;
  req.k = k;
  req.which = Which::largest;
  req.tol = opt.tol;
  req.max_restarts = opt.max_restarts;
  req.subspace = opt.subspace;
  req.seed = detail::eig_seed(seed);
  EigenResult eig = solve(req);
  std::vector<double> lsym_values(eig.values.size());
  for (std::size_t i = 0; i < eig.values.size(); ++i) lsym_values[i] = 2.0 - eig.values[i];
  return detail::finalize("standard_sc", "", g, gp, nullptr, k, seed, opt,
                          std::move(eig.vectors), std::move(lsym_values), eig.stats.seconds,
                          eig.stats.restarts, eig.stats.matvecs, t0);
}

// Fairness by projection: k-means on the largest-k eigenvectors of
// U = G - G F (F^T G F)^{-1} F^T G for the chosen similarity variant.
// The rw variant is not symmetric, so "largest" there means largest real
// part and a conjugate pair enters through its real invariant plane.
inline ClusteringResult fair_smw(const Graph& g, const GroupPartition& gp, GVariant variant,
                                 int k, std::uint64_t seed, const PipelineOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const ConstraintMatrix f(gp);
  FairOperator op(GOperator(g, variant), f);
  EigenRequest req;
  req.op = &op;
  req.k = k;
  req.which = Which::largest;
  req.tol = opt.tol;
  req.max_restarts = opt.max_restarts;
  req.subspace = opt.subspace;
  req.seed = detail::eig_seed(seed);
  EigenResult eig = solve(req);
  detail::project_to_constraint_kernel(f, eig.vectors);
  return detail::finalize("fair_smw", to_string(variant), g, gp, &f, k, seed, opt,
                          std::move(eig.vectors), std::move(eig.values), eig.stats.seconds,
                          eig.stats.restarts, eig.stats.matvecs, t0);
}

// Fairness by deflation: smallest-k eigenvectors of P L_sym P + sigma(I-P)
// with P deflating range(D^{-1/2} F), mapped back through D^{-1/2}.
inline ClusteringResult s_fair_sc(const Graph& g, const GroupPartition& gp, int k,
                                  std::uint64_t seed, const PipelineOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const ConstraintMatrix f(gp);
  DeflatedOperator op(g, f, opt.sigma);
  EigenRequest req;
  req.op = &op;
  req.k = k;
  req.which = Which::smallest;
  req.tol = opt.tol;
  req.max_restarts = opt.max_restarts;
  req.subspace = opt.subspace;
  req.seed = detail::eig_seed(seed);
  EigenResult eig = solve(req);

  const Matrix& q = op.deflation_basis();
  std::vector<double> qt(q.cols());
  for (int j = 0; j < eig.vectors.cols(); ++j) {
    auto col = eig.vectors.col_span(j);
    matvec_t(q, col, qt);
    for (int l = 0; l < q.cols(); ++l) axpy(-qt[l], q.col_span(l), col);
    for (int v = 0; v < g.order(); ++v) col[v] /= std::sqrt(g.degrees()[v]);
  }
  return detail::finalize("s_fair_sc", "", g, gp, &f, k, seed, opt, std::move(eig.vectors),
                          std::move(eig.values), eig.stats.seconds, eig.stats.restarts,
                          eig.stats.matvecs, t0);
}

namespace detail {

inline Matrix laplacian_times(const Graph& g, const Matrix& z) {
  Matrix lz(z.rows(), z.cols());
  for (int j = 0; j < z.cols(); ++j) g.laplacian_matvec(z.col_span(j), lz.col_span(j));
  return lz;
}

}  // namespace detail

// Dense nullspace baseline on the unnormalized Laplacian: smallest-k
// eigenvectors of Z^T L Z with Z spanning ker(F^T), embedding H = Z Y.
inline ClusteringResult fair_sc_unnormalized(const Graph& g, const GroupPartition& gp, int k,
                                             std::uint64_t seed,
                                             const PipelineOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const ConstraintMatrix f(gp);
  const Matrix z = null_space_basis(f, opt.dense_limit);
  if (k > z.cols())
    throw std::invalid_argument("fair_sc_unnormalized: k exceeds the constrained dimension");
  const auto t_eig = std::chrono::steady_clock::now();
  const Matrix b = matmul_at_b(z, detail::laplacian_times(g, z));
  const DenseEigen ed = dense_eigen(b, 1e-6);
  const double eig_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_eig).count();
  Matrix y(z.cols(), k);
  std::vector<double> values(k);
  for (int j = 0; j < k; ++j) {
    values[j] = ed.values[j];
    std::copy(ed.vectors.col(j), ed.vectors.col(j) + z.cols(), y.col(j));
  }
  Matrix h = matmul(z, y);
  return detail::finalize("fair_sc_unnormalized", "", g, gp, &f, k, seed, opt, std::move(h),
                          std::move(values), eig_seconds, 0, 0, t0);
}

// Dense nullspace baseline on the normalized objective: smallest-k of
// Q^{-1} Z^T L Z Q^{-1} with Q = (Z^T D Z)^{1/2}, embedding H = Z Q^{-1} X.
inline ClusteringResult fair_sc_normalized(const Graph& g, const GroupPartition& gp, int k,
                                           std::uint64_t seed, const PipelineOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  g.require_positive_degrees("fair_sc_normalized");
  const ConstraintMatrix f(gp);
  const Matrix z = null_space_basis(f, opt.dense_limit);
  if (k > z.cols())
    throw std::invalid_argument("fair_sc_normalized: k exceeds the constrained dimension");
  const auto t_eig = std::chrono::steady_clock::now();
  Matrix dz = z;
  for (int j = 0; j < dz.cols(); ++j)
    for (int v = 0; v < dz.rows(); ++v) dz(v, j) *= g.degrees()[v];
  const Matrix ztdz = matmul_at_b(z, dz);
  SpdRoots roots;
  try {
    roots = spd_roots(ztdz);
  } catch (const SingularMatrixError&) {
    throw SingularMatrixError(
        "fair_sc_normalized: Z^T D Z is numerically singular; the normalization is undefined");
  }
  const Matrix ztlz = matmul_at_b(z, detail::laplacian_times(g, z));
  Matrix b = matmul(roots.inv_sqrt, matmul(ztlz, roots.inv_sqrt));
  for (int j = 0; j < b.cols(); ++j)
    for (int i = 0; i < j; ++i) {
      const double avg = 0.5 * (b(i, j) + b(j, i));
      b(i, j) = b(j, i) = avg;
    }
  const DenseEigen ed = dense_eigen(b, 1e-6);
  const double eig_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_eig).count();
  Matrix x(z.cols(), k);
  std::vector<double> values(k);
  for (int j = 0; j < k; ++j) {
    values[j] = ed.values[j];
    std::copy(ed.vectors.col(j), ed.vectors.col(j) + z.cols(), x.col(j));
  }
  Matrix h = matmul(z, matmul(roots.inv_sqrt, x));
  return detail::finalize("fair_sc_normalized", "", g, gp, &f, k, seed, opt, std::move(h),
                          std::move(values), eig_seconds, 0, 0, t0);
}

}  // namespace fsc
