#pragma once

#include <charconv>
#include <climits>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fsc/fairness.hpp"
#include "fsc/graph.hpp"
#include "fsc/sbm.hpp"

namespace fsc {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::string strip_comment(const std::string& line) {
  const auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

inline bool parse_ll(const std::string& tok, long long& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

inline bool parse_double(const std::string& tok, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(tok, &used);
    return used == tok.size();
  } catch (const std::exception&) {
    return false;
  }
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

struct RawEdges {
  std::vector<EdgeTriple> edges;
  int n = 0;
  std::vector<long long> original_ids;          // compact id -> file id
  std::unordered_map<long long, int> id_map;    // file id -> compact id
  long long self_loops = 0;
};

// Reads "u v [w]" lines; '#' starts a comment, blank lines are skipped.
// Vertex ids are arbitrary non-negative integers and are compacted in
// order of first appearance. Self-loops are kept here and dealt with by
// the dataset loader.
inline RawEdges load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("load_edge_list: cannot open " + path);
  RawEdges raw;
  auto intern = [&raw](long long id) {
    const auto [it, inserted] = raw.id_map.try_emplace(id, static_cast<int>(raw.original_ids.size()));
    if (inserted) raw.original_ids.push_back(id);
    return it->second;
  };
  std::string line;
  long long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = detail::trim(detail::strip_comment(line));
    if (body.empty()) continue;
    std::istringstream ss(body);
    std::string tu, tv, tw, rest;
    ss >> tu >> tv;
    const bool has_w = static_cast<bool>(ss >> tw);
    if (ss >> rest)
      throw DataError("load_edge_list: " + path + ":" + std::to_string(lineno) +
                      ": expected 'u v [w]'");
    long long u = 0, v = 0;
    if (tv.empty() || !detail::parse_ll(tu, u) || !detail::parse_ll(tv, v))
      throw DataError("load_edge_list: " + path + ":" + std::to_string(lineno) +
                      ": malformed vertex id");
    if (u < 0 || v < 0)
      throw DataError("load_edge_list: " + path + ":" + std::to_string(lineno) +
                      ": vertex ids must be non-negative");
    double w = 1.0;
    if (has_w && !detail::parse_double(tw, w))
      throw DataError("load_edge_list: " + path + ":" + std::to_string(lineno) +
                      ": malformed weight");
    if (w < 0.0)
      throw DataError("load_edge_list: " + path + ":" + std::to_string(lineno) +
                      ": negative weight");
    if (u == v) ++raw.self_loops;
    raw.edges.push_back({intern(u), intern(v), w});
  }
  raw.n = static_cast<int>(raw.original_ids.size());
  if (raw.n == 0) throw DataError("load_edge_list: " + path + " contains no edges");
  return raw;
}

// Reads "node_id,group_id" (comma or whitespace separated; a single
// non-numeric header line is tolerated). Every vertex of the edge list
// must be covered exactly once. Group labels are compacted in order of
// first appearance.
inline GroupPartition load_groups(const std::string& path, const RawEdges& nodes) {
  std::ifstream in(path);
  if (!in) throw DataError("load_groups: cannot open " + path);
  std::vector<int> raw_label(nodes.n, 0);
  std::vector<char> seen(nodes.n, 0);
  std::string line;
  long long lineno = 0;
  bool any = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string body = detail::trim(detail::strip_comment(line));
    if (body.empty()) continue;
    for (char& c : body)
      if (c == ',' || c == ';' || c == '\t') c = ' ';
    std::istringstream ss(body);
    std::string ta, tb, rest;
    ss >> ta >> tb;
    if (ss >> rest)
      throw DataError("load_groups: " + path + ":" + std::to_string(lineno) +
                      ": expected 'node_id,group_id'");
    long long id = 0, grp = 0;
    if (!detail::parse_ll(ta, id) || tb.empty() || !detail::parse_ll(tb, grp)) {
      if (!any) continue;  // header line
      throw DataError("load_groups: " + path + ":" + std::to_string(lineno) +
                      ": malformed row");
    }
    any = true;
    const auto it = nodes.id_map.find(id);
    if (it == nodes.id_map.end()) continue;  // vertex absent from the edge list
    const int v = it->second;
    if (seen[v])
      throw DataError("load_groups: " + path + ":" + std::to_string(lineno) +
                      ": duplicate group row for vertex " + std::to_string(id));
    seen[v] = 1;
    raw_label[v] = static_cast<int>(grp);
  }
  long long missing = 0;
  long long first_missing = -1;
  for (int v = 0; v < nodes.n; ++v) {
    if (!seen[v]) {
      ++missing;
      if (first_missing < 0) first_missing = nodes.original_ids[v];
    }
  }
  if (missing > 0)
    throw DataError("load_groups: " + path + ": " + std::to_string(missing) +
                    " vertices have no group (first missing id " +
                    std::to_string(first_missing) + ")");
  GroupPartition gp = GroupPartition::from_labels(raw_label);
  if (gp.group_count() < 2)
    throw DataError("load_groups: " + path + ": all vertices share one group");
  return gp;
}

struct DatasetBundle {
  std::string name;
  Graph graph;
  GroupPartition groups;
  std::vector<std::string> provenance;  // every transformation applied on load
};

inline DatasetBundle load_dataset(const std::string& name, const std::string& edges_path,
                                  const std::string& groups_path,
                                  bool largest_component = true) {
  DatasetBundle bundle;
  bundle.name = name;
  RawEdges raw = load_edge_list(edges_path);
  GroupPartition gp = load_groups(groups_path, raw);
  if (raw.self_loops > 0) {
    std::vector<EdgeTriple> kept;
    kept.reserve(raw.edges.size());
    for (const auto& e : raw.edges)
      if (e.u != e.v) kept.push_back(e);
    raw.edges.swap(kept);
    bundle.provenance.push_back("dropped " + std::to_string(raw.self_loops) + " self-loops");
  }
  Graph g = Graph::from_edge_list(raw.edges, raw.n);
  if (largest_component) {
    const int parts = component_count(g);
    if (parts > 1) {
      ComponentExtract ex = extract_largest_component(g);
      std::vector<int> labels(ex.graph.order());
      for (int v = 0; v < ex.graph.order(); ++v)
        labels[v] = gp.group_of(ex.original_vertex[v]);
      const int old_n = g.order();
      const int old_h = gp.group_count();
      gp = GroupPartition::from_labels(labels);
      g = std::move(ex.graph);
      bundle.provenance.push_back("kept largest of " + std::to_string(parts) +
                                  " components: n " + std::to_string(old_n) + " -> " +
                                  std::to_string(g.order()));
      if (gp.group_count() != old_h)
        bundle.provenance.push_back("group count changed: h " + std::to_string(old_h) +
                                    " -> " + std::to_string(gp.group_count()));
    }
  }
  if (gp.group_count() < 2)
    throw DataError("load_dataset: " + name + ": fewer than two groups after loading");
  bundle.graph = std::move(g);
  bundle.groups = std::move(gp);
  return bundle;
}

inline constexpr const char* kMetricsHeader =
    "dataset,algorithm,variant,k,seed,avg_balance,min_balance,ncut,error,"
    "constraint_residual,total_s,eigs_s,kmeans_s,restarts,matvecs";

struct MetricsRow {
  std::string dataset;
  std::string algorithm;
  std::string variant;
  int k = 0;
  std::uint64_t seed = 0;
  double avg_balance = 0.0;
  double min_balance = 0.0;
  double ncut = 0.0;
  std::optional<double> error;
  double constraint_residual = 0.0;
  double total_s = 0.0;
  double eigs_s = 0.0;
  double kmeans_s = 0.0;
  int restarts = 0;
  std::uint64_t matvecs = 0;
};

namespace detail {

inline std::string fmt_g10(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace detail

inline std::string format_metrics_row(const MetricsRow& r) {
  std::ostringstream out;
  out << r.dataset << ',' << r.algorithm << ',' << r.variant << ',' << r.k << ',' << r.seed
      << ',' << detail::fmt_g10(r.avg_balance) << ',' << detail::fmt_g10(r.min_balance) << ','
      << detail::fmt_g10(r.ncut) << ',' << (r.error ? detail::fmt_g10(*r.error) : "") << ','
      << detail::fmt_g10(r.constraint_residual) << ',' << detail::fmt_g10(r.total_s) << ','
      << detail::fmt_g10(r.eigs_s) << ',' << detail::fmt_g10(r.kmeans_s) << ',' << r.restarts
      << ',' << r.matvecs;
  return out.str();
}

inline void write_metrics(const std::vector<MetricsRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("write_metrics: cannot open " + path + " for writing");
  out << kMetricsHeader << '\n';
  for (const auto& r : rows) out << format_metrics_row(r) << '\n';
  if (!out) throw DataError("write_metrics: write to " + path + " failed");
}

inline std::vector<MetricsRow> read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("read_metrics: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("read_metrics: " + path + " is empty");
  if (detail::trim(line) != kMetricsHeader)
    throw DataError("read_metrics: " + path + ": unexpected header");
  std::vector<MetricsRow> rows;
  long long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(detail::trim(line), ',');
    if (f.size() != 15)
      throw DataError("read_metrics: " + path + ":" + std::to_string(lineno) +
                      ": expected 15 fields, got " + std::to_string(f.size()));
    MetricsRow r;
    r.dataset = f[0];
    r.algorithm = f[1];
    r.variant = f[2];
    long long k = 0, restarts = 0, matvecs = 0, seed = 0;
    double val = 0.0;
    auto need_ll = [&](const std::string& tok, long long& out_ll, const char* what) {
      if (!detail::parse_ll(tok, out_ll))
        throw DataError("read_metrics: " + path + ":" + std::to_string(lineno) +
                        ": malformed " + what);
    };
    auto need_d = [&](const std::string& tok, const char* what) {
      if (!detail::parse_double(tok, val))
        throw DataError("read_metrics: " + path + ":" + std::to_string(lineno) +
                        ": malformed " + what);
      return val;
    };
    need_ll(f[3], k, "k");
    r.k = static_cast<int>(k);
    need_ll(f[4], seed, "seed");
    r.seed = static_cast<std::uint64_t>(seed);
    r.avg_balance = need_d(f[5], "avg_balance");
    r.min_balance = need_d(f[6], "min_balance");
    r.ncut = need_d(f[7], "ncut");
    if (!f[8].empty()) r.error = need_d(f[8], "error");
    r.constraint_residual = need_d(f[9], "constraint_residual");
    r.total_s = need_d(f[10], "total_s");
    r.eigs_s = need_d(f[11], "eigs_s");
    r.kmeans_s = need_d(f[12], "kmeans_s");
    need_ll(f[13], restarts, "restarts");
    r.restarts = static_cast<int>(restarts);
    need_ll(f[14], matvecs, "matvecs");
    r.matvecs = static_cast<std::uint64_t>(matvecs);
    rows.push_back(std::move(r));
  }
  return rows;
}

struct BenchConfig {
  std::string name;
  std::string edges_path;
  std::string groups_path;
  bool largest_component = true;
  bool use_sbm = false;
  SbmSpec sbm;
  std::vector<std::string> algorithms;
  std::vector<int> ks;
  std::vector<std::uint64_t> seeds{0};
  double sigma = 3.0;
  double tol = 1e-8;
  int max_restarts = 1000;
  int dense_limit = 3000;
  bool normalize_rows = false;
  int kmeans_restarts = 10;
};

inline const std::vector<std::string>& known_algorithms() {
  static const std::vector<std::string> names = {
      "standard_sc",         "fair_smw_sym",       "fair_smw_rw",
      "fair_smw_aff",        "s_fair_sc",          "fair_sc_unnormalized",
      "fair_sc_normalized"};
  return names;
}

namespace detail {

// "2..15" (inclusive range), "2,5,9" or a single value.
inline std::vector<long long> parse_range_list(const std::string& value, const std::string& key) {
  std::vector<long long> out;
  const auto dots = value.find("..");
  if (dots != std::string::npos) {
    long long lo = 0, hi = 0;
    if (!parse_ll(trim(value.substr(0, dots)), lo) ||
        !parse_ll(trim(value.substr(dots + 2)), hi) || lo > hi)
      throw ConfigError("config: " + key + ": bad range '" + value + "'");
    for (long long x = lo; x <= hi; ++x) out.push_back(x);
    return out;
  }
  for (const auto& tok : split(value, ',')) {
    long long x = 0;
    if (!parse_ll(trim(tok), x))
      throw ConfigError("config: " + key + ": bad value '" + tok + "'");
    out.push_back(x);
  }
  return out;
}

inline bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError("config: " + key + ": expected a boolean, got '" + value + "'");
}

}  // namespace detail

// Flat key = value format; '#' starts a comment. See README for the keys.
inline BenchConfig parse_config_text(const std::string& text, const std::string& origin) {
  BenchConfig cfg;
  std::istringstream in(text);
  std::string line;
  long long lineno = 0;
  bool saw_k = false;
  std::unordered_set<std::string> seen_keys;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = detail::trim(detail::strip_comment(line));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: " + origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    const std::string key = detail::trim(body.substr(0, eq));
    const std::string value = detail::trim(body.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config: " + origin + ":" + std::to_string(lineno) +
                        ": empty key or value");
    if (!seen_keys.insert(key).second)
      throw ConfigError("config: " + origin + ":" + std::to_string(lineno) +
                        ": duplicate key '" + key + "'");

    auto as_ll = [&](long long lo, long long hi) {
      long long x = 0;
      if (!detail::parse_ll(value, x) || x < lo || x > hi)
        throw ConfigError("config: " + key + ": expected an integer in [" + std::to_string(lo) +
                          ", " + std::to_string(hi) + "], got '" + value + "'");
      return x;
    };
    auto as_double = [&]() {
      double x = 0.0;
      if (!detail::parse_double(value, x))
        throw ConfigError("config: " + key + ": expected a number, got '" + value + "'");
      return x;
    };

    if (key == "name") {
      cfg.name = value;
    } else if (key == "edges") {
      cfg.edges_path = value;
    } else if (key == "groups") {
      cfg.groups_path = value;
    } else if (key == "largest_component") {
      cfg.largest_component = detail::parse_bool(value, key);
    } else if (key == "sbm_n") {
      cfg.use_sbm = true;
      cfg.sbm.n = static_cast<int>(as_ll(2, 100000000));
    } else if (key == "sbm_k") {
      cfg.use_sbm = true;
      cfg.sbm.k = static_cast<int>(as_ll(1, 1000000));
    } else if (key == "sbm_h") {
      cfg.use_sbm = true;
      cfg.sbm.h = static_cast<int>(as_ll(1, 1000000));
    } else if (key == "sbm_a") {
      cfg.use_sbm = true;
      cfg.sbm.a = as_double();
    } else if (key == "sbm_b") {
      cfg.use_sbm = true;
      cfg.sbm.b = as_double();
    } else if (key == "sbm_seed") {
      cfg.use_sbm = true;
      cfg.sbm.seed = static_cast<std::uint64_t>(as_ll(0, LLONG_MAX));
    } else if (key == "sbm_mode") {
      cfg.use_sbm = true;
      if (value == "proportional") {
        cfg.sbm.mode = GroupMode::proportional;
      } else if (value == "adversarial") {
        cfg.sbm.mode = GroupMode::adversarial;
      } else {
        throw ConfigError("config: sbm_mode: expected proportional or adversarial, got '" +
                          value + "'");
      }
    } else if (key == "sbm_connectivity_fix") {
      cfg.use_sbm = true;
      cfg.sbm.connectivity_fix = detail::parse_bool(value, key);
    } else if (key == "algorithms") {
      if (value == "all") {
        cfg.algorithms = known_algorithms();
      } else {
        for (const auto& tok : detail::split(value, ',')) {
          const std::string name = detail::trim(tok);
          bool ok = false;
          for (const auto& known : known_algorithms()) ok = ok || known == name;
          if (!ok) throw ConfigError("config: algorithms: unknown algorithm '" + name + "'");
          cfg.algorithms.push_back(name);
        }
      }
    } else if (key == "k") {
      saw_k = true;
      cfg.ks.clear();
      for (long long x : detail::parse_range_list(value, key)) {
        if (x < 1 || x > 1000000) throw ConfigError("config: k: out of range value");
        cfg.ks.push_back(static_cast<int>(x));
      }
    } else if (key == "seeds") {
      cfg.seeds.clear();
      for (long long x : detail::parse_range_list(value, key)) {
        if (x < 0) throw ConfigError("config: seeds: negative seed");
        cfg.seeds.push_back(static_cast<std::uint64_t>(x));
      }
    } else if (key == "sigma") {
      cfg.sigma = as_double();
      if (!(cfg.sigma > 0.0)) throw ConfigError("config: sigma must be positive");
    } else if (key == "tol") {
      cfg.tol = as_double();
      if (!(cfg.tol > 0.0)) throw ConfigError("config: tol must be positive");
    } else if (key == "max_restarts") {
      cfg.max_restarts = static_cast<int>(as_ll(0, 1000000000));
    } else if (key == "dense_limit") {
      cfg.dense_limit = static_cast<int>(as_ll(1, 100000));
    } else if (key == "normalize_rows") {
      cfg.normalize_rows = detail::parse_bool(value, key);
    } else if (key == "kmeans_restarts") {
      cfg.kmeans_restarts = static_cast<int>(as_ll(1, 100000));
    } else {
      throw ConfigError("config: " + origin + ":" + std::to_string(lineno) +
                        ": unknown key '" + key + "'");
    }
  }

  const bool has_files = !cfg.edges_path.empty() || !cfg.groups_path.empty();
  if (has_files && (cfg.edges_path.empty() || cfg.groups_path.empty()))
    throw ConfigError("config: need both 'edges' and 'groups'");
  if (has_files && cfg.use_sbm)
    throw ConfigError("config: give either a dataset or an sbm_* block, not both");
  if (!has_files && !cfg.use_sbm)
    throw ConfigError("config: no input; set 'edges'/'groups' or an sbm_* block");
  if (cfg.use_sbm && cfg.sbm.n < 2) throw ConfigError("config: sbm_n is required");
  if (!saw_k) throw ConfigError("config: 'k' is required");
  if (cfg.algorithms.empty()) cfg.algorithms = known_algorithms();
  if (cfg.seeds.empty()) throw ConfigError("config: 'seeds' must not be empty");
  if (cfg.name.empty()) {
    if (cfg.use_sbm) {
      cfg.name = std::string("sbm_n") + std::to_string(cfg.sbm.n) + "_k" +
                 std::to_string(cfg.sbm.k) + "_h" + std::to_string(cfg.sbm.h);
    } else {
      std::string base = cfg.edges_path;
      const auto slash = base.find_last_of("/\\");
      if (slash != std::string::npos) base = base.substr(slash + 1);
      const auto dot = base.find_last_of('.');
      if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
      cfg.name = base;
    }
  }
  return cfg;
}

inline BenchConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

}  // namespace fsc
