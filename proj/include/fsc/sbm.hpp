#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsc/algorithms.hpp"
#include "fsc/fairness.hpp"
#include "fsc/graph.hpp"
#include "fsc/rng.hpp"

namespace fsc {

enum class GroupMode { proportional, adversarial };

struct SbmSpec {
  int n = 0;
  int k = 2;  // planted clusters
  int h = 2;  // demographic groups
  double a = 8.0;
  double b = 1.0;
  GroupMode mode = GroupMode::proportional;
  std::uint64_t seed = 0;
  bool connectivity_fix = true;
};

struct SbmInstance {
  Graph graph;
  GroupPartition groups;
  Assignment truth;
  double p_in = 0.0;
  double p_out = 0.0;
};

// Planted-partition benchmark. Probabilities scale with
// q = (log n / n)^{2/3}: p_in = min(1, a q), p_out = min(1, b q), so the
// graph stays sparse but comfortably above the connectivity threshold at
// the default a = 8, b = 1.
//
// Group layout: proportional spreads each cluster round-robin over the h
// groups (every cluster x group cell within one of n/(k h)), adversarial
// ties group membership to the cluster (group = cluster mod h), making
// the planted clustering maximally unfair.
inline SbmInstance generate(const SbmSpec& spec) {
  if (spec.n < 2) throw std::invalid_argument("sbm: n must be >= 2");
  if (spec.k < 1 || spec.h < 1) throw std::invalid_argument("sbm: k and h must be >= 1");
  if (spec.a < 0.0 || spec.b < 0.0) throw std::invalid_argument("sbm: a and b must be >= 0");
  if (spec.mode == GroupMode::proportional && spec.n < spec.k * spec.h)
    throw std::invalid_argument("sbm: proportional mode needs n >= k*h");
  if (spec.mode == GroupMode::adversarial && spec.k < spec.h)
    throw std::invalid_argument("sbm: adversarial mode needs k >= h");

  const double q = std::pow(std::log(static_cast<double>(spec.n)) / spec.n, 2.0 / 3.0);
  SbmInstance inst;
  inst.p_in = std::min(1.0, spec.a * q);
  inst.p_out = std::min(1.0, spec.b * q);

  std::vector<int> cluster_of(spec.n);
  std::vector<int> group_of(spec.n);
  {
    int v = 0;
    const int base = spec.n / spec.k;
    const int extra = spec.n % spec.k;
    for (int c = 0; c < spec.k; ++c) {
      const int size = base + (c < extra ? 1 : 0);
      for (int r = 0; r < size; ++r, ++v) {
        cluster_of[v] = c;
        group_of[v] = spec.mode == GroupMode::proportional ? r % spec.h : c % spec.h;
      }
    }
  }

  Rng rng(spec.seed);
  std::vector<EdgeTriple> edges;
  edges.reserve(static_cast<std::size_t>(spec.n) * 8);
  for (int i = 0; i < spec.n; ++i) {
    for (int j = i + 1; j < spec.n; ++j) {
      const double p = cluster_of[i] == cluster_of[j] ? inst.p_in : inst.p_out;
      if (rng.uniform() < p) edges.push_back({i, j, 1.0});
    }
  }
  inst.graph = Graph::from_edge_list(edges, spec.n);
  if (spec.connectivity_fix)
    inst.graph = ensure_connected(inst.graph, rng.fork(0x636f6e6eULL).seed());
  inst.groups = GroupPartition(std::move(group_of), spec.h);
  inst.truth = Assignment{std::move(cluster_of), spec.k};
  return inst;
}

struct BalanceGapReport {
  double standard_balance = 0.0;
  double fair_smw_sym = 0.0;
  double fair_smw_rw = 0.0;
  double fair_smw_aff = 0.0;
  double s_fair_sc_balance = 0.0;
  double fair_sc_unnormalized_balance = 0.0;
  double fair_sc_normalized_balance = 0.0;
};

// On an adversarial instance the planted (unfair) clustering is what
// plain spectral clustering recovers, so its average balance collapses
// while every constrained pipeline stays near perfect balance. This runs
// all of them on one instance and reports the averages side by side.
inline BalanceGapReport adversarial_balance_gap(int n, int k, int h, std::uint64_t seed,
                                                const PipelineOptions& opt = {}) {
  SbmSpec spec;
  spec.n = n;
  spec.k = k;
  spec.h = h;
  spec.mode = GroupMode::adversarial;
  spec.seed = seed;
  const SbmInstance inst = generate(spec);
  BalanceGapReport rep;
  rep.standard_balance = standard_sc(inst.graph, inst.groups, k, seed, opt).average_balance;
  rep.fair_smw_sym =
      fair_smw(inst.graph, inst.groups, GVariant::sym, k, seed, opt).average_balance;
  rep.fair_smw_rw = fair_smw(inst.graph, inst.groups, GVariant::rw, k, seed, opt).average_balance;
  rep.fair_smw_aff =
      fair_smw(inst.graph, inst.groups, GVariant::aff, k, seed, opt).average_balance;
  rep.s_fair_sc_balance = s_fair_sc(inst.graph, inst.groups, k, seed, opt).average_balance;
  rep.fair_sc_unnormalized_balance =
      fair_sc_unnormalized(inst.graph, inst.groups, k, seed, opt).average_balance;
  rep.fair_sc_normalized_balance =
      fair_sc_normalized(inst.graph, inst.groups, k, seed, opt).average_balance;
  return rep;
}

}  // namespace fsc
