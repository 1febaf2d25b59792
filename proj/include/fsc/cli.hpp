#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fsc/algorithms.hpp"
#include "fsc/eigensolve.hpp"
#include "fsc/io.hpp"
#include "fsc/sbm.hpp"

namespace fsc {

struct CliOptions {
  std::string config_path;
  std::string out_path = "metrics.csv";
  int jobs = 1;
  std::uint64_t seed_base = 0;
  std::optional<double> sigma;
  std::optional<double> tol;
};

enum ExitCode { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2 };

// Runs one named pipeline. Names follow the config grammar: the
// projected-operator family is selected as fair_smw_{sym,rw,aff}.
inline ClusteringResult run_algorithm(const std::string& name, const Graph& g,
                                      const GroupPartition& gp, int k, std::uint64_t seed,
                                      const PipelineOptions& opt) {
  if (name == "standard_sc") return standard_sc(g, gp, k, seed, opt);
  if (name == "fair_smw_sym") return fair_smw(g, gp, GVariant::sym, k, seed, opt);
  if (name == "fair_smw_rw") return fair_smw(g, gp, GVariant::rw, k, seed, opt);
  if (name == "fair_smw_aff") return fair_smw(g, gp, GVariant::aff, k, seed, opt);
  if (name == "s_fair_sc") return s_fair_sc(g, gp, k, seed, opt);
  if (name == "fair_sc_unnormalized") return fair_sc_unnormalized(g, gp, k, seed, opt);
  if (name == "fair_sc_normalized") return fair_sc_normalized(g, gp, k, seed, opt);
  throw std::invalid_argument("run_algorithm: unknown algorithm '" + name + "'");
}

namespace detail {

struct GridInputs {
  // One entry per benchmark seed; file datasets share a single instance.
  struct PerSeed {
    const Graph* graph = nullptr;
    const GroupPartition* groups = nullptr;
    const Assignment* truth = nullptr;
  };
  std::vector<SbmInstance> sbm_instances;
  DatasetBundle bundle;
  bool from_files = false;

  PerSeed at(std::size_t seed_idx) const {
    if (from_files) return {&bundle.graph, &bundle.groups, nullptr};
    const SbmInstance& inst = sbm_instances[seed_idx];
    return {&inst.graph, &inst.groups, &inst.truth};
  }
};

inline GridInputs prepare_inputs(const BenchConfig& cfg, std::uint64_t seed_base,
                                 std::ostream& log) {
  GridInputs in;
  if (!cfg.edges_path.empty()) {
    in.from_files = true;
    in.bundle = load_dataset(cfg.name, cfg.edges_path, cfg.groups_path, cfg.largest_component);
    for (const auto& note : in.bundle.provenance) log << "# " << cfg.name << ": " << note << "\n";
  } else {
    for (std::uint64_t s : cfg.seeds) {
      SbmSpec spec = cfg.sbm;
      spec.seed = mix_seed(cfg.sbm.seed ^ mix_seed(seed_base + s));
      in.sbm_instances.push_back(generate(spec));
    }
  }
  return in;
}

inline PipelineOptions pipeline_options(const BenchConfig& cfg, const CliOptions& cli) {
  PipelineOptions opt;
  opt.tol = cli.tol.value_or(cfg.tol);
  opt.sigma = cli.sigma.value_or(cfg.sigma);
  opt.max_restarts = cfg.max_restarts;
  opt.dense_limit = cfg.dense_limit;
  opt.kmeans.normalize_rows = cfg.normalize_rows;
  opt.kmeans.restarts = cfg.kmeans_restarts;
  return opt;
}

inline MetricsRow to_metrics_row(const std::string& dataset, std::uint64_t seed,
                                 const ClusteringResult& r) {
  MetricsRow row;
  row.dataset = dataset;
  row.algorithm = r.algorithm;
  row.variant = r.variant;
  row.k = r.assignment.k;
  row.seed = seed;
  row.avg_balance = r.average_balance;
  row.min_balance = r.min_balance;
  row.ncut = r.ncut;
  row.error = r.error;
  row.constraint_residual = r.constraint_residual;
  row.total_s = r.timings.total_s;
  row.eigs_s = r.timings.eigensolver_s;
  row.kmeans_s = r.timings.kmeans_s;
  row.restarts = r.restarts;
  row.matvecs = r.matvecs;
  return row;
}

}  // namespace detail

// Executes the algorithms x k x seeds grid from the config, streaming one
// CSV row per cell to --out. Rows appear in grid order regardless of
// --jobs; non-timing columns are reproducible bitwise for fixed seeds.
// Timing-sensitive comparisons should run with --jobs 1.
inline int cmd_run(const CliOptions& cli, std::ostream& log, std::ostream& err) {
  BenchConfig cfg;
  try {
    cfg = parse_config(cli.config_path);
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kExitConfig;
  }
  detail::GridInputs inputs;
  try {
    inputs = detail::prepare_inputs(cfg, cli.seed_base, log);
  } catch (const std::exception& e) {
    err << "input setup failed: " << e.what() << "\n";
    return kExitConfig;
  }
  const PipelineOptions base_opt = detail::pipeline_options(cfg, cli);

  struct Task {
    std::string algorithm;
    int k = 0;
    std::size_t seed_idx = 0;
  };
  std::vector<Task> tasks;
  for (const auto& alg : cfg.algorithms)
    for (int k : cfg.ks)
      for (std::size_t si = 0; si < cfg.seeds.size(); ++si) tasks.push_back({alg, k, si});

  std::ofstream out(cli.out_path);
  if (!out) {
    err << "cannot open " << cli.out_path << " for writing\n";
    return kExitConfig;
  }
  out << kMetricsHeader << '\n';

  // One warm-up per algorithm (excluded from the CSV) so first-touch
  // allocation costs do not land in the first timed cell.
  for (const auto& alg : cfg.algorithms) {
    try {
      const auto in = inputs.at(0);
      PipelineOptions opt = base_opt;
      opt.ground_truth = in.truth;
      (void)run_algorithm(alg, *in.graph, *in.groups, cfg.ks.front(),
                          cli.seed_base + cfg.seeds.front(), opt);
    } catch (const std::exception&) {
      // The corresponding grid cell will report the failure.
    }
  }

  std::vector<std::optional<MetricsRow>> rows(tasks.size());
  std::vector<std::string> failures(tasks.size());
  std::vector<char> done(tasks.size(), 0);
  std::mutex io_mu;
  std::size_t flushed = 0;
  std::atomic<std::size_t> next{0};

  auto flush_ready = [&]() {
    while (flushed < tasks.size() && done[flushed]) {
      if (rows[flushed]) out << format_metrics_row(*rows[flushed]) << '\n';
      ++flushed;
    }
    out.flush();
  };

  auto worker = [&]() {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= tasks.size()) return;
      const Task& t = tasks[idx];
      const std::uint64_t seed = cli.seed_base + cfg.seeds[t.seed_idx];
      try {
        const auto in = inputs.at(t.seed_idx);
        PipelineOptions opt = base_opt;
        opt.ground_truth = in.truth;
        const ClusteringResult res = run_algorithm(t.algorithm, *in.graph, *in.groups, t.k,
                                                   seed, opt);
        std::lock_guard<std::mutex> lock(io_mu);
        rows[idx] = detail::to_metrics_row(cfg.name, seed, res);
        done[idx] = 1;
        flush_ready();
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(io_mu);
        failures[idx] = t.algorithm + " k=" + std::to_string(t.k) +
                        " seed=" + std::to_string(seed) + ": " + e.what();
        done[idx] = 1;
        flush_ready();
      }
    }
  };

  const int jobs = std::max(1, std::min<int>(cli.jobs, static_cast<int>(tasks.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  out.flush();

  // Per-algorithm summary over the successful cells.
  struct Agg {
    int runs = 0;
    double balance = 0, ncut = 0, error = 0, total = 0;
    long long restarts = 0;
    int error_runs = 0;
  };
  std::map<std::pair<std::string, std::string>, Agg> agg;
  for (const auto& row : rows) {
    if (!row) continue;
    Agg& a = agg[{row->algorithm, row->variant}];
    ++a.runs;
    a.balance += row->avg_balance;
    a.ncut += row->ncut;
    a.total += row->total_s;
    a.restarts += row->restarts;
    if (row->error) {
      a.error += *row->error;
      ++a.error_runs;
    }
  }
  log << std::left << std::setw(22) << "algorithm" << std::setw(9) << "variant" << std::right
      << std::setw(6) << "runs" << std::setw(13) << "avg_balance" << std::setw(11) << "ncut"
      << std::setw(11) << "error" << std::setw(11) << "restarts" << std::setw(11) << "total_s"
      << "\n";
  for (const auto& [key, a] : agg) {
    std::ostringstream line;
    line << std::left << std::setw(22) << key.first << std::setw(9)
         << (key.second.empty() ? "-" : key.second) << std::right << std::setw(6) << a.runs
         << std::setw(13) << std::setprecision(4) << std::fixed << a.balance / a.runs
         << std::setw(11) << a.ncut / a.runs << std::setw(11);
    if (a.error_runs > 0) {
      line << a.error / a.error_runs;
    } else {
      line << "-";
    }
    line << std::setw(11) << std::setprecision(1) << static_cast<double>(a.restarts) / a.runs
         << std::setw(11) << std::setprecision(3) << a.total;
    log << line.str() << "\n";
  }

  bool any_failed = false;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!failures[i].empty()) {
      any_failed = true;
      err << "cell failed: " << failures[i] << "\n";
    }
  }
  return any_failed ? kExitRuntime : kExitOk;
}

inline constexpr const char* kGapHeader =
    "dataset,operator,n,k,seed,lambda_k,lambda_k1,gap,rel_gap,restarts,matvecs";

// Eigen-gap survey: for every (k, seed) cell, reports gap and solver cost
// for the three projected operators (largest mode) and the deflated
// operator (smallest mode).
inline int cmd_eigengap(const CliOptions& cli, std::ostream& log, std::ostream& err) {
  BenchConfig cfg;
  try {
    cfg = parse_config(cli.config_path);
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kExitConfig;
  }
  detail::GridInputs inputs;
  try {
    inputs = detail::prepare_inputs(cfg, cli.seed_base, log);
  } catch (const std::exception& e) {
    err << "input setup failed: " << e.what() << "\n";
    return kExitConfig;
  }
  const double tol = cli.tol.value_or(cfg.tol);
  const double sigma = cli.sigma.value_or(cfg.sigma);

  std::ofstream out(cli.out_path);
  if (!out) {
    err << "cannot open " << cli.out_path << " for writing\n";
    return kExitConfig;
  }
  out << kGapHeader << '\n';
  bool any_failed = false;
  for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
    const std::uint64_t seed = cli.seed_base + cfg.seeds[si];
    const auto in = inputs.at(si);
    const int n = in.graph->order();
    const ConstraintMatrix f(*in.groups);
    for (int k : cfg.ks) {
      for (const char* op_name : {"fair_sym", "fair_rw", "fair_aff", "deflated"}) {
        try {
          GapReport rep;
          if (std::string(op_name) == "deflated") {
            DeflatedOperator op(*in.graph, f, sigma);
            rep = eigen_gap_report(op, k, Which::smallest, tol, seed);
          } else {
            const GVariant variant = std::string(op_name) == "fair_sym" ? GVariant::sym
                                     : std::string(op_name) == "fair_rw" ? GVariant::rw
                                                                         : GVariant::aff;
            FairOperator op(GOperator(*in.graph, variant), f);
            rep = eigen_gap_report(op, k, Which::largest, tol, seed);
          }
          out << cfg.name << ',' << op_name << ',' << n << ',' << k << ',' << seed << ','
              << detail::fmt_g10(rep.lambda_k) << ',' << detail::fmt_g10(rep.lambda_k1) << ','
              << detail::fmt_g10(rep.gap) << ',' << detail::fmt_g10(rep.rel_gap) << ','
              << rep.stats.restarts << ',' << rep.stats.matvecs << '\n';
        } catch (const std::exception& e) {
          any_failed = true;
          err << "gap cell failed: " << op_name << " k=" << k << " seed=" << seed << ": "
              << e.what() << "\n";
        }
      }
      out.flush();
    }
  }
  return any_failed ? kExitRuntime : kExitOk;
}

// Walks through the canonical 4-cycle: the unshifted similarity operator
// annihilates the constraint column (singular Gram matrix), while the
// shifted sym variant produces the perfectly balanced 2-clustering. Exit
// 0 requires the balanced outcome (and, when run, the failure too).
inline int cmd_figure1(std::ostream& out, bool run_unshifted = true, bool run_shifted = true) {
  const std::vector<EdgeTriple> edges = {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 0, 1.0}};
  const Graph g = Graph::from_edge_list(edges, 4);
  const GroupPartition gp({0, 0, 1, 1}, 2);
  const ConstraintMatrix f(gp);
  out << "4-cycle: edges 0-1, 1-2, 2-3, 3-0, unit weights, all degrees 2\n";
  out << "groups: {0,1} and {2,3}; constraint column F = (+1/2, +1/2, -1/2, -1/2)\n\n";

  bool saw_failure = false;
  bool saw_balanced = false;

  if (run_unshifted) {
    out << "[1] unshifted G = D^{-1/2} W D^{-1/2}\n";
    std::vector<double> gf(4);
    GOperator unshifted(g, GVariant::sym, 0.0);
    unshifted.apply_transpose(f.dense().col_span(0), gf);  // symmetric: same as apply
    out << "    G F = (" << gf[0] << ", " << gf[1] << ", " << gf[2] << ", " << gf[3] << ")\n";
    try {
      FairOperator bad(GOperator(g, GVariant::sym, 0.0), f);
      out << "    unexpectedly succeeded\n";
    } catch (const SingularGramError& e) {
      saw_failure = true;
      out << "    " << e.what() << "\n";
    }
    out << "\n";
  }

  if (run_shifted) {
    out << "[2] shifted G_sym = D^{-1/2} W D^{-1/2} + 2I\n";
    FairOperator u(GOperator(g, GVariant::sym), f);
    Matrix dense_u(4, 4);
    std::vector<double> e(4, 0.0);
    for (int j = 0; j < 4; ++j) {
      e[j] = 1.0;
      u.apply(e, dense_u.col_span(j));
      e[j] = 0.0;
    }
    const DenseEigen ed = dense_eigen(dense_u);
    out << "    U spectrum (ascending): " << ed.values[0] << " " << ed.values[1] << " "
        << ed.values[2] << " " << ed.values[3] << "\n";
    const ClusteringResult res = fair_smw(g, gp, GVariant::sym, 2, 0);
    out << "    embedding rows:";
    for (int v = 0; v < 4; ++v)
      out << "  (" << res.embedding(v, 0) << ", " << res.embedding(v, 1) << ")";
    out << "\n    clusters:";
    for (int c = 0; c < 2; ++c) {
      out << " {";
      bool first = true;
      for (int v = 0; v < 4; ++v) {
        if (res.assignment.labels[v] == c) {
          out << (first ? "" : ",") << v;
          first = false;
        }
      }
      out << "}";
    }
    out << "\n    average balance: " << res.average_balance << "\n";
    saw_balanced = res.average_balance == 1.0;
  }

  const bool ok = saw_balanced && (!run_unshifted || saw_failure);
  out << "\nresult: " << (ok ? "both behaviors confirmed" : "expected behavior missing") << "\n";
  return ok ? kExitOk : 1;
}

namespace detail {

struct FetchedDataset {
  std::string name;
  std::string edges;   // normalized edge list path
  std::string groups;  // normalized group csv path
};

inline bool run_shell(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return rc == 0;
}

inline bool download(const std::string& url, const std::string& dest) {
  return run_shell("curl -fsSL --max-time 120 -o '" + dest + "' '" + url + "' 2>/dev/null");
}

inline std::string sha256_of(const std::string& path) {
  const std::string tmp = path + ".sha";
  if (!run_shell("sha256sum '" + path + "' > '" + tmp + "' 2>/dev/null")) return "";
  std::ifstream in(tmp);
  std::string digest;
  in >> digest;
  std::filesystem::remove(tmp);
  return digest;
}

// Rewrites a delimited table (comma/semicolon/tab) to whitespace-separated
// columns, optionally skipping a header line.
inline bool normalize_pairs(const std::string& src, const std::string& dst, bool skip_header) {
  std::ifstream in(src);
  if (!in) return false;
  std::ofstream out(dst);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first && skip_header) {
      first = false;
      continue;
    }
    first = false;
    for (char& c : line)
      if (c == ',' || c == ';' || c == '\t') c = ' ';
    const std::string body = trim(line);
    if (!body.empty()) out << body << '\n';
  }
  return true;
}

}  // namespace detail

// Best-effort downloader for the four public benchmark graphs. Network
// access is often unavailable; everything that cannot be fetched is
// reported and skipped, and recorded digests (datasets/CHECKSUMS) are
// verified on refetch. Downstream tests skip absent datasets loudly.
inline int cmd_fetch_datasets(const std::string& dir, std::ostream& out) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string tmp = dir + "/.tmp";
  fs::create_directories(tmp);

  std::map<std::string, std::string> recorded;
  const std::string checksum_path = dir + "/CHECKSUMS";
  {
    std::ifstream in(checksum_path);
    std::string digest, name;
    while (in >> digest >> name) recorded[name] = digest;
  }
  bool checksum_dirty = false;
  auto note_digest = [&](const std::string& name, const std::string& path,
                         std::ostream& log) -> bool {
    const std::string digest = detail::sha256_of(path);
    if (digest.empty()) return true;
    const auto it = recorded.find(name);
    if (it == recorded.end()) {
      recorded[name] = digest;
      checksum_dirty = true;
      return true;
    }
    if (it->second != digest) {
      log << "  checksum mismatch for " << name << ": recorded " << it->second << ", got "
          << digest << "\n";
      return false;
    }
    return true;
  };

  int fetched = 0, failed = 0;
  auto finish_dataset = [&](const std::string& name, bool ok, const std::string& why) {
    if (ok) {
      ++fetched;
      out << name << ": ok\n";
    } else {
      ++failed;
      out << name << ": skipped (" << why << ")\n";
    }
  };

  // LastFM Asia and Deezer Europe ship as SNAP zip archives of CSV files.
  struct SnapSpec {
    const char* name;
    const char* url;
    const char* edges_csv;
    const char* target_csv;
  };
  const SnapSpec snap[] = {
      {"lastfm", "https://snap.stanford.edu/data/lastfm_asia.zip",
       "lastfm_asia/lastfm_asia_edges.csv", "lastfm_asia/lastfm_asia_target.csv"},
      {"deezer", "https://snap.stanford.edu/data/deezer_europe.zip",
       "deezer_europe/deezer_europe_edges.csv", "deezer_europe/deezer_europe_target.csv"},
  };
  for (const auto& s : snap) {
    const std::string edges_out = dir + "/" + s.name + "_edges.txt";
    const std::string groups_out = dir + "/" + s.name + "_groups.csv";
    if (fs::exists(edges_out) && fs::exists(groups_out)) {
      finish_dataset(s.name, true, "");
      continue;
    }
    const std::string zip = tmp + "/" + s.name + ".zip";
    if (!detail::download(s.url, zip)) {
      finish_dataset(s.name, false, "download failed");
      continue;
    }
    if (!note_digest(std::string(s.name) + ".zip", zip, out)) {
      finish_dataset(s.name, false, "checksum mismatch");
      continue;
    }
    if (!detail::run_shell("cd '" + tmp + "' && python3 -m zipfile -e '" + s.name +
                           ".zip' . 2>/dev/null")) {
      finish_dataset(s.name, false, "unzip failed");
      continue;
    }
    const bool ok = detail::normalize_pairs(tmp + "/" + s.edges_csv, edges_out, true) &&
                    detail::normalize_pairs(tmp + "/" + s.target_csv, groups_out, true);
    finish_dataset(s.name, ok, "conversion failed");
  }

  // FacebookNet: SocioPatterns high-school Facebook friendships plus the
  // gender metadata; vertices without a declared gender are dropped.
  {
    const std::string edges_out = dir + "/facebooknet_edges.txt";
    const std::string groups_out = dir + "/facebooknet_groups.csv";
    if (fs::exists(edges_out) && fs::exists(groups_out)) {
      finish_dataset("facebooknet", true, "");
    } else {
      const std::string pairs_gz = tmp + "/fb_pairs.csv.gz";
      const std::string meta = tmp + "/fb_meta.txt";
      bool ok =
          detail::download("http://www.sociopatterns.org/wp-content/uploads/2015/07/"
                           "Facebook-known-pairs_data_2013.csv.gz",
                           pairs_gz) &&
          detail::download("http://www.sociopatterns.org/wp-content/uploads/2015/09/"
                           "metadata_2013.txt",
                           meta) &&
          note_digest("facebooknet_pairs.csv.gz", pairs_gz, out) &&
          note_digest("facebooknet_metadata.txt", meta, out) &&
          detail::run_shell("gunzip -kf '" + pairs_gz + "' 2>/dev/null");
      if (ok) {
        std::ifstream meta_in(meta);
        std::map<long long, int> gender;  // 0 female, 1 male
        std::string line;
        while (std::getline(meta_in, line)) {
          std::istringstream ss(line);
          long long id;
          std::string cls, gen;
          if (!(ss >> id >> cls >> gen)) continue;
          if (gen == "F")
            gender[id] = 0;
          else if (gen == "M")
            gender[id] = 1;
        }
        std::ifstream pairs_in(tmp + "/fb_pairs.csv");
        std::ofstream eo(edges_out);
        std::map<long long, int> used;
        while (std::getline(pairs_in, line)) {
          for (char& c : line)
            if (c == ',' || c == ';') c = ' ';
          std::istringstream ss(line);
          long long u, v;
          int w;
          if (!(ss >> u >> v >> w)) continue;
          if (w != 1) continue;  // 1 marks a reported friendship
          if (!gender.count(u) || !gender.count(v)) continue;
          eo << u << ' ' << v << '\n';
          used[u] = gender[u];
          used[v] = gender[v];
        }
        std::ofstream go(groups_out);
        for (const auto& [id, gen] : used) go << id << ',' << gen << '\n';
        ok = !used.empty();
        if (!ok) {
          fs::remove(edges_out);
          fs::remove(groups_out);
        }
      }
      finish_dataset("facebooknet", ok, "download or conversion failed");
    }
  }

  // German credit graph from the Graph Mining Fairness Data repository;
  // the protected attribute is the Gender column of the feature table.
  {
    const std::string edges_out = dir + "/german_edges.txt";
    const std::string groups_out = dir + "/german_groups.csv";
    if (fs::exists(edges_out) && fs::exists(groups_out)) {
      finish_dataset("german", true, "");
    } else {
      const std::string raw_edges = tmp + "/german_edges.txt";
      const std::string raw_csv = tmp + "/german.csv";
      bool ok = detail::download(
                    "https://raw.githubusercontent.com/yushundong/"
                    "Graph-Mining-Fairness-Data/main/dataset/german/german_edges.txt",
                    raw_edges) &&
                detail::download(
                    "https://raw.githubusercontent.com/yushundong/"
                    "Graph-Mining-Fairness-Data/main/dataset/german/german.csv",
                    raw_csv) &&
                note_digest("german_edges.txt", raw_edges, out) &&
                note_digest("german.csv", raw_csv, out);
      if (ok) {
        ok = detail::normalize_pairs(raw_edges, edges_out, false);
        std::ifstream in(raw_csv);
        std::string header;
        ok = ok && static_cast<bool>(std::getline(in, header));
        if (ok) {
          const auto cols = detail::split(header, ',');
          int gender_col = -1;
          for (std::size_t i = 0; i < cols.size(); ++i)
            if (cols[i] == "Gender" || cols[i] == "gender") gender_col = static_cast<int>(i);
          if (gender_col < 0) {
            ok = false;
          } else {
            std::ofstream go(groups_out);
            std::string line;
            long long row = 0;
            while (std::getline(in, line)) {
              const auto f = detail::split(line, ',');
              if (static_cast<int>(f.size()) <= gender_col) continue;
              go << row << ',' << detail::trim(f[gender_col]) << '\n';
              ++row;
            }
            ok = row > 0;
          }
        }
        if (!ok) {
          fs::remove(edges_out);
          fs::remove(groups_out);
        }
      }
      finish_dataset("german", ok, "download or conversion failed");
    }
  }

  if (checksum_dirty) {
    std::ofstream co(checksum_path);
    for (const auto& [name, digest] : recorded) co << digest << "  " << name << '\n';
  }
  std::error_code ec;
  fs::remove_all(tmp, ec);
  out << fetched << " dataset(s) available, " << failed << " unavailable\n";
  return failed == 0 ? kExitOk : kExitRuntime;
}

}  // namespace fsc
