#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "fsc/rng.hpp"

namespace fsc {

struct EdgeTriple {
  int u = 0;
  int v = 0;
  double w = 1.0;
};

// Undirected weighted graph in CSR form. Both directions of every edge
// are stored; degree means weighted degree (sum of incident weights).
class Graph {
 public:
  Graph() = default;

  // Builds from an edge list. Duplicate edges (in either orientation) are
  // summed. Self-loops are rejected unless allow_self_loops is set, in
  // which case the loop weight counts once toward the degree.
  static Graph from_edge_list(std::span<const EdgeTriple> edges, int n,
                              bool allow_self_loops = false) {
    if (n <= 0) throw std::invalid_argument("Graph: vertex count must be positive");
    std::vector<EdgeTriple> canon;
    canon.reserve(edges.size());
    for (const auto& e : edges) {
      if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n)
        throw std::invalid_argument("Graph: edge endpoint out of range [0, n)");
      if (e.u == e.v && !allow_self_loops)
        throw std::invalid_argument("Graph: self-loop at vertex " + std::to_string(e.u));
      if (!(e.w > 0.0))
        throw std::invalid_argument("Graph: edge weight must be positive");
      canon.push_back({std::min(e.u, e.v), std::max(e.u, e.v), e.w});
    }
    std::sort(canon.begin(), canon.end(), [](const EdgeTriple& a, const EdgeTriple& b) {
      return std::tie(a.u, a.v) < std::tie(b.u, b.v);
    });
    std::vector<EdgeTriple> merged;
    merged.reserve(canon.size());
    for (const auto& e : canon) {
      if (!merged.empty() && merged.back().u == e.u && merged.back().v == e.v) {
        merged.back().w += e.w;
      } else {
        merged.push_back(e);
      }
    }

    Graph g;
    g.n_ = n;
    g.undirected_edges_ = static_cast<std::int64_t>(merged.size());
    std::vector<std::int64_t> counts(n, 0);
    for (const auto& e : merged) {
      ++counts[e.u];
      if (e.u != e.v) ++counts[e.v];
    }
    g.row_ptr_.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) g.row_ptr_[i + 1] = g.row_ptr_[i] + counts[i];
    g.col_idx_.resize(g.row_ptr_[n]);
    g.values_.resize(g.row_ptr_[n]);
    std::vector<std::int64_t> fill(g.row_ptr_.begin(), g.row_ptr_.end() - 1);
    for (const auto& e : merged) {
      g.col_idx_[fill[e.u]] = e.v;
      g.values_[fill[e.u]] = e.w;
      ++fill[e.u];
      if (e.u != e.v) {
        g.col_idx_[fill[e.v]] = e.u;
        g.values_[fill[e.v]] = e.w;
        ++fill[e.v];
      }
    }
    for (int u = 0; u < n; ++u) {
      const auto lo = g.row_ptr_[u], hi = g.row_ptr_[u + 1];
      std::vector<std::pair<int, double>> row;
      row.reserve(hi - lo);
      for (auto p = lo; p < hi; ++p) row.emplace_back(g.col_idx_[p], g.values_[p]);
      std::sort(row.begin(), row.end());
      for (auto p = lo; p < hi; ++p) {
        g.col_idx_[p] = row[p - lo].first;
        g.values_[p] = row[p - lo].second;
      }
    }
    g.degree_.assign(n, 0.0);
    for (int u = 0; u < n; ++u)
      for (auto p = g.row_ptr_[u]; p < g.row_ptr_[u + 1]; ++p) g.degree_[u] += g.values_[p];
    g.min_degree_ = n > 0 ? *std::min_element(g.degree_.begin(), g.degree_.end()) : 0.0;
    return g;
  }

  int order() const { return n_; }
  std::int64_t edge_count() const { return undirected_edges_; }

  std::span<const int> neighbors(int u) const {
    return {col_idx_.data() + row_ptr_[u], static_cast<std::size_t>(row_ptr_[u + 1] - row_ptr_[u])};
  }
  std::span<const double> weights(int u) const {
    return {values_.data() + row_ptr_[u], static_cast<std::size_t>(row_ptr_[u + 1] - row_ptr_[u])};
  }

  const std::vector<double>& degrees() const { return degree_; }
  double min_degree() const { return min_degree_; }
  bool has_positive_degrees() const { return n_ > 0 && min_degree_ > 0.0; }

  // y = W x
  void adjacency_matvec(std::span<const double> x, std::span<double> y) const {
    check_vec(x, y);
    for (int u = 0; u < n_; ++u) {
      double s = 0.0;
      for (auto p = row_ptr_[u]; p < row_ptr_[u + 1]; ++p) s += values_[p] * x[col_idx_[p]];
      y[u] = s;
    }
  }

  // y = L x = (D - W) x
  void laplacian_matvec(std::span<const double> x, std::span<double> y) const {
    check_vec(x, y);
    for (int u = 0; u < n_; ++u) {
      double s = degree_[u] * x[u];
      for (auto p = row_ptr_[u]; p < row_ptr_[u + 1]; ++p) s -= values_[p] * x[col_idx_[p]];
      y[u] = s;
    }
  }

  // y = D^{-1/2} W D^{-1/2} x; requires positive degrees.
  void normalized_adjacency_matvec(std::span<const double> x, std::span<double> y) const {
    check_vec(x, y);
    require_positive_degrees("normalized_adjacency_matvec");
    for (int u = 0; u < n_; ++u) {
      double s = 0.0;
      for (auto p = row_ptr_[u]; p < row_ptr_[u + 1]; ++p)
        s += values_[p] * x[col_idx_[p]] / std::sqrt(degree_[col_idx_[p]]);
      y[u] = s / std::sqrt(degree_[u]);
    }
  }

  void require_positive_degrees(const char* where) const {
    if (!has_positive_degrees())
      throw std::domain_error(std::string(where) + ": zero-degree vertex encountered");
  }

  // All undirected edges, each listed once with u <= v.
  std::vector<EdgeTriple> edge_list() const {
    std::vector<EdgeTriple> out;
    out.reserve(static_cast<std::size_t>(undirected_edges_));
    for (int u = 0; u < n_; ++u)
      for (auto p = row_ptr_[u]; p < row_ptr_[u + 1]; ++p)
        if (col_idx_[p] >= u) out.push_back({u, col_idx_[p], values_[p]});
    return out;
  }

 private:
  void check_vec(std::span<const double> x, std::span<double> y) const {
    if (static_cast<int>(x.size()) != n_ || static_cast<int>(y.size()) != n_)
      throw std::invalid_argument("Graph matvec: vector size mismatch");
  }

  int n_ = 0;
  std::int64_t undirected_edges_ = 0;
  std::vector<std::int64_t> row_ptr_;
  std::vector<int> col_idx_;
  std::vector<double> values_;
  std::vector<double> degree_;
  double min_degree_ = 0.0;
};

// Component id per vertex, ids assigned in order of first discovery.
inline std::vector<int> connected_components(const Graph& g) {
  const int n = g.order();
  std::vector<int> comp(n, -1);
  std::vector<int> stack;
  int next = 0;
  for (int s = 0; s < n; ++s) {
    if (comp[s] != -1) continue;
    comp[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v : g.neighbors(u)) {
        if (comp[v] == -1) {
          comp[v] = next;
          stack.push_back(v);
        }
      }
    }
    ++next;
  }
  return comp;
}

inline int component_count(const Graph& g) {
  const auto comp = connected_components(g);
  return comp.empty() ? 0 : 1 + *std::max_element(comp.begin(), comp.end());
}

// Joins the components of g into one by chaining unit-weight edges between
// randomly chosen representatives. A connected graph comes back unchanged.
inline Graph ensure_connected(const Graph& g, std::uint64_t seed) {
  const auto comp = connected_components(g);
  const int parts = comp.empty() ? 0 : 1 + *std::max_element(comp.begin(), comp.end());
  if (parts <= 1) return g;
  std::vector<std::vector<int>> members(parts);
  for (int v = 0; v < g.order(); ++v) members[comp[v]].push_back(v);
  Rng rng(seed);
  std::vector<int> reps(parts);
  for (int c = 0; c < parts; ++c) reps[c] = members[c][rng.index(members[c].size())];
  std::vector<int> order(parts);
  for (int c = 0; c < parts; ++c) order[c] = c;
  rng.shuffle(order);
  auto edges = g.edge_list();
  for (int i = 0; i + 1 < parts; ++i)
    edges.push_back({reps[order[i]], reps[order[i + 1]], 1.0});
  return Graph::from_edge_list(edges, g.order());
}

struct ComponentExtract {
  Graph graph;
  std::vector<int> original_vertex;  // new id -> old id
};

// Induced subgraph on the largest connected component (ties: lowest id).
inline ComponentExtract extract_largest_component(const Graph& g) {
  const auto comp = connected_components(g);
  const int parts = comp.empty() ? 0 : 1 + *std::max_element(comp.begin(), comp.end());
  if (parts == 0) throw std::invalid_argument("extract_largest_component: empty graph");
  std::vector<int> sizes(parts, 0);
  for (int c : comp) ++sizes[c];
  const int best = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  std::vector<int> new_id(g.order(), -1);
  ComponentExtract out;
  for (int v = 0; v < g.order(); ++v) {
    if (comp[v] == best) {
      new_id[v] = static_cast<int>(out.original_vertex.size());
      out.original_vertex.push_back(v);
    }
  }
  std::vector<EdgeTriple> edges;
  for (const auto& e : g.edge_list())
    if (new_id[e.u] != -1 && new_id[e.v] != -1)
      edges.push_back({new_id[e.u], new_id[e.v], e.w});
  out.graph = Graph::from_edge_list(edges, static_cast<int>(out.original_vertex.size()));
  return out;
}

}  // namespace fsc
