#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "fsc/dense.hpp"

namespace fsc {

// Partition of the vertex set into h demographic groups, labels 0..h-1.
class GroupPartition {
 public:
  GroupPartition() = default;

  GroupPartition(std::vector<int> group_of, int h) : group_of_(std::move(group_of)), h_(h) {
    if (h_ < 1) throw std::invalid_argument("GroupPartition: group count must be >= 1");
    sizes_.assign(h_, 0);
    for (int g : group_of_) {
      if (g < 0 || g >= h_)
        throw std::invalid_argument("GroupPartition: group label out of range [0, h)");
      ++sizes_[g];
    }
    for (int s = 0; s < h_; ++s)
      if (sizes_[s] == 0)
        throw std::invalid_argument("GroupPartition: group " + std::to_string(s) + " is empty");
  }

  // Remaps arbitrary integer labels to 0..h-1 in order of first appearance.
  static GroupPartition from_labels(std::span<const int> raw) {
    std::unordered_map<int, int> remap;
    std::vector<int> group_of;
    group_of.reserve(raw.size());
    for (int label : raw) {
      auto [it, inserted] = remap.try_emplace(label, static_cast<int>(remap.size()));
      group_of.push_back(it->second);
    }
    return GroupPartition(std::move(group_of), static_cast<int>(remap.size()));
  }

  int size() const { return static_cast<int>(group_of_.size()); }
  int group_count() const { return h_; }
  int group_of(int v) const { return group_of_[v]; }
  const std::vector<int>& groups() const { return group_of_; }
  const std::vector<int>& group_sizes() const { return sizes_; }

 private:
  std::vector<int> group_of_;
  std::vector<int> sizes_;
  int h_ = 0;
};

// Group-fairness constraint matrix F, one column per non-reference group.
// Column s-1 is g_1 - g_s where g_s is the indicator of group s divided by
// the group size, so F^T x stacks the differences between the mean of x
// over the reference group and over each other group. Columns sum to zero
// and F has full column rank h-1.
class ConstraintMatrix {
 public:
  explicit ConstraintMatrix(const GroupPartition& gp) : gp_(&gp) {
    const int h = gp.group_count();
    if (h < 2)
      throw std::invalid_argument("ConstraintMatrix: need at least two groups, got " +
                                  std::to_string(h));
    inv_size_.resize(h);
    for (int s = 0; s < h; ++s) inv_size_[s] = 1.0 / gp.group_sizes()[s];
    dense_ = Matrix(gp.size(), h - 1);
    for (int v = 0; v < gp.size(); ++v) {
      const int s = gp.group_of(v);
      if (s == 0) {
        for (int j = 0; j < h - 1; ++j) dense_(v, j) = inv_size_[0];
      } else {
        dense_(v, s - 1) = -inv_size_[s];
      }
    }
  }

  int n() const { return gp_->size(); }
  int cols() const { return gp_->group_count() - 1; }
  const GroupPartition& partition() const { return *gp_; }
  const Matrix& dense() const { return dense_; }

  // out = F^T x, computed off the group structure in O(n).
  void apply_transpose(std::span<const double> x, std::span<double> out) const {
    if (static_cast<int>(x.size()) != n() || static_cast<int>(out.size()) != cols())
      throw std::invalid_argument("ConstraintMatrix::apply_transpose: size mismatch");
    const int h = gp_->group_count();
    std::vector<double> sums(h, 0.0);
    for (int v = 0; v < n(); ++v) sums[gp_->group_of(v)] += x[v];
    const double ref_mean = sums[0] * inv_size_[0];
    for (int s = 1; s < h; ++s) out[s - 1] = ref_mean - sums[s] * inv_size_[s];
  }

  // out = F z.
  void apply(std::span<const double> z, std::span<double> out) const {
    if (static_cast<int>(z.size()) != cols() || static_cast<int>(out.size()) != n())
      throw std::invalid_argument("ConstraintMatrix::apply: size mismatch");
    double ref = 0.0;
    for (int j = 0; j < cols(); ++j) ref += z[j];
    for (int v = 0; v < n(); ++v) {
      const int s = gp_->group_of(v);
      out[v] = s == 0 ? ref * inv_size_[0] : -z[s - 1] * inv_size_[s];
    }
  }

 private:
  const GroupPartition* gp_ = nullptr;
  std::vector<double> inv_size_;
  Matrix dense_;
};

inline ConstraintMatrix build_constraint_matrix(const GroupPartition& gp) {
  return ConstraintMatrix(gp);
}

// Balance of one cluster: the smallest ratio between the sizes of two
// group slices inside it. Empty clusters score 0 and set the flag.
inline double cluster_balance(std::span<const int> labels, const GroupPartition& gp, int cluster,
                              bool* empty_cluster = nullptr) {
  if (static_cast<int>(labels.size()) != gp.size())
    throw std::invalid_argument("cluster_balance: label count differs from partition size");
  const int h = gp.group_count();
  std::vector<long long> counts(h, 0);
  long long total = 0;
  for (int v = 0; v < gp.size(); ++v) {
    if (labels[v] == cluster) {
      ++counts[gp.group_of(v)];
      ++total;
    }
  }
  if (empty_cluster) *empty_cluster = (total == 0);
  if (total == 0) return 0.0;
  const auto [mn, mx] = std::minmax_element(counts.begin(), counts.end());
  if (*mx == 0) return 0.0;
  return static_cast<double>(*mn) / static_cast<double>(*mx);
}

// Mean of the per-cluster balances over all k clusters.
inline double average_balance(std::span<const int> labels, int k, const GroupPartition& gp) {
  if (k < 1) throw std::invalid_argument("average_balance: k must be >= 1");
  double acc = 0.0;
  for (int c = 0; c < k; ++c) acc += cluster_balance(labels, gp, c);
  return acc / static_cast<double>(k);
}

inline double min_cluster_balance(std::span<const int> labels, int k, const GroupPartition& gp) {
  double best = 1.0;
  for (int c = 0; c < k; ++c) best = std::min(best, cluster_balance(labels, gp, c));
  return best;
}

// max |F^T H| over entries, scaled by the largest column norm of H.
inline double constraint_residual(const ConstraintMatrix& f, const Matrix& h) {
  if (h.rows() != f.n())
    throw std::invalid_argument("constraint_residual: embedding rows differ from n");
  double col_norm = 0.0;
  for (int j = 0; j < h.cols(); ++j) col_norm = std::max(col_norm, norm2(h.col_span(j)));
  if (col_norm == 0.0) return 0.0;
  std::vector<double> ftx(f.cols());
  double worst = 0.0;
  for (int j = 0; j < h.cols(); ++j) {
    f.apply_transpose(h.col_span(j), ftx);
    for (double v : ftx) worst = std::max(worst, std::abs(v));
  }
  return worst / col_norm;
}

}  // namespace fsc
