#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "distclinr/bounds.hpp"
#include "distclinr/engine.hpp"

namespace distclinr {

inline constexpr int kCsvSchemaVersion = 1;

struct ExperimentConfig {
  std::vector<Mode> modes = {Mode::Direct, Mode::Monolithic, Mode::Distributed};
  std::vector<std::size_t> n_values = {20};
  std::vector<std::size_t> tau_e_values = {1};
  double p = 1e-4;
  NoiseModelKind noise = NoiseModelKind::CircuitLevel;
  std::size_t t = 3;
  std::size_t r = 3;
  std::size_t num_circuits = 20;
  std::size_t shots_per_circuit = 200;
  EngineKind engine = EngineKind::PauliFrame;
  RestartPolicy restart_policy = RestartPolicy::Immediate;
  std::uint64_t master_seed = 1;
  std::size_t links = 1;
  std::size_t initial_inventory = 0;
  std::size_t layer_cap = 1'000'000;
  std::size_t threads = 0;  // 0: hardware concurrency
  std::string output = "out";
  bool trace = false;

  NoiseParams noise_params() const {
    return noise == NoiseModelKind::Uniform ? NoiseParams::uniform(p) : NoiseParams::circuit_level(p);
  }

  void validate() const {
    if (modes.empty()) throw std::invalid_argument("no modes selected");
    if (n_values.empty() || tau_e_values.empty()) throw std::invalid_argument("n and tau_e lists must not be empty");
    for (auto n : n_values)
      if (n < 2) throw std::invalid_argument("n must be at least 2");
    if (t < 1 || num_circuits < 1 || shots_per_circuit < 1 || links < 1)
      throw std::invalid_argument("t, circuits, shots and links must be positive");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
    if (initial_inventory > 0)
      for (auto n : n_values)
        if (initial_inventory > n) throw std::invalid_argument("initial inventory exceeds link storage");
  }
};

// ---------------------------------------------------------------------------
// Config file: one `key = value` per line, `#` starts a comment, lists are
// comma separated.

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long x = 0;
  try {
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    x = std::stoull(v, &pos, 0);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad integer for '" + key + "': " + v);
  }
  if (pos != v.size()) throw std::invalid_argument("bad integer for '" + key + "': " + v);
  return x;
}

inline double parse_real(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad number for '" + key + "': " + v);
  }
  if (pos != v.size()) throw std::invalid_argument("bad number for '" + key + "': " + v);
  return x;
}

inline std::vector<std::size_t> parse_sizes(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& s : split_list(v)) out.push_back(parse_uint(key, s));
  if (out.empty()) throw std::invalid_argument("empty list for '" + key + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("bad boolean for '" + key + "': " + v);
}

}  // namespace detail

inline Mode parse_mode(const std::string& s) {
  if (s == "direct") return Mode::Direct;
  if (s == "mono_clinr" || s == "mono") return Mode::Monolithic;
  if (s == "dist_clinr" || s == "dist") return Mode::Distributed;
  throw std::invalid_argument("unknown mode '" + s + "'");
}

inline EngineKind parse_engine(const std::string& s) {
  if (s == "frame") return EngineKind::PauliFrame;
  if (s == "reference" || s == "tableau") return EngineKind::ReferenceTableau;
  throw std::invalid_argument("unknown engine '" + s + "'");
}

inline const char* engine_name(EngineKind e) { return e == EngineKind::PauliFrame ? "frame" : "reference"; }

inline RestartPolicy parse_restart_policy(const std::string& s) {
  if (s == "immediate") return RestartPolicy::Immediate;
  if (s == "end_of_round") return RestartPolicy::EndOfRound;
  throw std::invalid_argument("unknown restart policy '" + s + "'");
}

inline const char* restart_policy_name(RestartPolicy p) {
  return p == RestartPolicy::Immediate ? "immediate" : "end_of_round";
}

/// Applies one key/value pair to the config.
inline void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
  using namespace detail;
  if (key == "mode") {
    c.modes.clear();
    for (const auto& m : split_list(value)) {
      if (m == "all") {
        c.modes = {Mode::Direct, Mode::Monolithic, Mode::Distributed};
        break;
      }
      c.modes.push_back(parse_mode(m));
    }
  } else if (key == "n") {
    c.n_values = parse_sizes(key, value);
  } else if (key == "tau_e") {
    c.tau_e_values = parse_sizes(key, value);
  } else if (key == "p") {
    c.p = parse_real(key, value);
  } else if (key == "noise") {
    if (value == "circuit") c.noise = NoiseModelKind::CircuitLevel;
    else if (value == "uniform") c.noise = NoiseModelKind::Uniform;
    else throw std::invalid_argument("unknown noise model '" + value + "'");
  } else if (key == "t") {
    c.t = parse_uint(key, value);
  } else if (key == "r") {
    c.r = parse_uint(key, value);
  } else if (key == "circuits") {
    c.num_circuits = parse_uint(key, value);
  } else if (key == "shots") {
    c.shots_per_circuit = parse_uint(key, value);
  } else if (key == "engine") {
    c.engine = parse_engine(value);
  } else if (key == "restart_policy") {
    c.restart_policy = parse_restart_policy(value);
  } else if (key == "seed") {
    c.master_seed = parse_uint(key, value);
  } else if (key == "links") {
    c.links = parse_uint(key, value);
  } else if (key == "initial_inventory") {
    c.initial_inventory = parse_uint(key, value);
  } else if (key == "layer_cap") {
    c.layer_cap = parse_uint(key, value);
  } else if (key == "threads") {
    c.threads = parse_uint(key, value);
  } else if (key == "out") {
    c.output = value;
  } else if (key == "trace") {
    c.trace = parse_bool(key, value);
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key = value");
    try {
      set_config_value(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return parse_config(in);
}

// ---------------------------------------------------------------------------
// Seeds

inline std::uint64_t circuit_seed(std::uint64_t master, std::size_t n, std::size_t index) {
  return derive_seed(master, {n, index});
}

inline std::uint64_t shot_seed(std::uint64_t circuit, std::size_t shot) { return derive_seed(circuit, shot); }

// ---------------------------------------------------------------------------
// Sweep

struct BoundReport {
  double q = 0;      // estimated restart probability per attempt
  double delta = 0;  // mean RSP&V depth per attempt
  double mono = 0;
  double dist = 0;
  bool eq9 = false;
  std::size_t links_required = 1;
};

struct SweepRow {
  Mode mode = Mode::Direct;
  std::size_t n = 0;
  std::size_t tau_e = 0;
  SweepStats stats;
  std::vector<std::uint64_t> circuit_seeds;
  std::optional<BoundReport> bounds;
  std::size_t conservation_violations = 0;
};

struct SweepResult {
  ExperimentConfig config;
  std::vector<SweepRow> rows;
  double seconds = 0;

  const SweepRow* find(Mode m, std::size_t n, std::size_t tau_e) const {
    for (const auto& r : rows)
      if (r.mode == m && r.n == n && r.tau_e == tau_e) return &r;
    return nullptr;
  }
};

/// Runs f(i) for i in [0, count) on a small pool. Each index is processed
/// exactly once; callers write results by index, so output is independent of
/// scheduling.
inline void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& f) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex m;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(m);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

/// Bound columns from the sweep's own restart statistics.
inline BoundReport bound_report(const SweepStats& s, std::size_t t, std::size_t n, std::size_t tau_e,
                                std::size_t links) {
  std::uint64_t restarts = 0, attempts = 0, layers = 0;
  for (const auto& c : s.circuits) {
    restarts += c.restarts;
    attempts += c.attempts;
    layers += c.rspv_layers;
  }
  BoundReport b;
  if (attempts == 0) return b;
  b.q = double(restarts) / double(attempts);
  b.delta = double(layers) / double(attempts);
  // A run in which every attempt restarted would leave q = 1; keep it finite.
  b.q = std::min(b.q, 1.0 - 1e-12);
  const auto in = BoundInputs::uniform(t, b.delta, b.q, n, double(tau_e), links);
  b.mono = monolithic_expected_depth(in);
  b.dist = distributed_depth_bound(in);
  b.eq9 = entanglement_sufficient(n, double(tau_e), b.delta, b.q, t, links);
  b.links_required = b.delta > 0 ? required_parallel_links(t, n, double(tau_e), b.delta, b.q) : 1;
  return b;
}

using ProgressSink = std::function<void(const SweepRow&)>;
using SweepTraceSink = std::function<void(std::size_t n, std::size_t tau_e, const LayerRecord&)>;

/// Runs every (mode, n, tau_e) point. Circuits depend only on (seed, n,
/// index), so all modes see the same circuits. Direct and monolithic runs do
/// not depend on tau_e; they are computed once per n and reported for every
/// tau_e. With a trace sink, the first shot of circuit 0 of each distributed
/// point is traced.
inline SweepResult run_sweep(const ExperimentConfig& cfg, const ProgressSink& progress = {},
                             const SweepTraceSink& trace = {}) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  SweepResult out;
  out.config = cfg;
  const auto noise = cfg.noise_params();
  EngineOptions opts;
  opts.engine = cfg.engine;
  opts.layer_cap = cfg.layer_cap;
  ClinrConfig clinr;
  clinr.t = cfg.t;
  clinr.r = cfg.r;
  clinr.restart_policy = cfg.restart_policy;
  clinr.validate();

  for (std::size_t n : cfg.n_values) {
    std::vector<std::uint64_t> seeds(cfg.num_circuits);
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = circuit_seed(cfg.master_seed, n, i);
    std::vector<PreparedCircuit> circuits(cfg.num_circuits);
    parallel_for(circuits.size(), cfg.threads, [&](std::size_t i) {
      Rng rng(seeds[i]);
      const auto c = random_clifford_circuit(n, n * n, rng);
      circuits[i] = prepare(c, cfg.t, cfg.r, derive_seed(seeds[i], {0xB10CULL}));
    });

    auto run_point = [&](Mode mode, std::size_t tau_e) {
      ModeSpec spec;
      spec.mode = mode;
      spec.clinr = clinr;
      spec.arch = ArchConfig::for_clinr(n, cfg.t, tau_e, cfg.links);
      spec.arch.initial_inventory = cfg.initial_inventory;
      spec.arch.layer_cap = cfg.layer_cap;
      std::vector<CircuitStats> per(circuits.size());
      std::vector<std::size_t> violations(circuits.size(), 0);
      parallel_for(circuits.size(), cfg.threads, [&](std::size_t c) {
        for (std::size_t s = 0; s < cfg.shots_per_circuit; ++s) {
          const auto r = run_shot(circuits[c], spec, noise, shot_seed(seeds[c], s), opts);
          per[c].add(r);
          violations[c] += r.conservation_violations;
        }
      });
      if (trace && mode == Mode::Distributed) {
        run_distributed_clinr(circuits[0], clinr, spec.arch, noise, shot_seed(seeds[0], 0), opts,
                              [&](const LayerRecord& rec) { trace(n, tau_e, rec); });
      }
      SweepRow row;
      row.mode = mode;
      row.n = n;
      row.tau_e = tau_e;
      row.stats = aggregate(std::move(per));
      row.circuit_seeds = seeds;
      for (auto v : violations) row.conservation_violations += v;
      if (mode != Mode::Direct) row.bounds = bound_report(row.stats, cfg.t, n, tau_e, cfg.links);
      return row;
    };

    for (Mode mode : cfg.modes) {
      if (mode == Mode::Distributed) {
        for (std::size_t tau_e : cfg.tau_e_values) {
          out.rows.push_back(run_point(mode, tau_e));
          if (progress) progress(out.rows.back());
        }
        continue;
      }
      const auto base = run_point(mode, cfg.tau_e_values.front());
      for (std::size_t tau_e : cfg.tau_e_values) {
        auto row = base;
        row.tau_e = tau_e;
        if (row.bounds) row.bounds = bound_report(row.stats, cfg.t, n, tau_e, cfg.links);
        out.rows.push_back(std::move(row));
        if (progress) progress(out.rows.back());
      }
    }
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

// ---------------------------------------------------------------------------
// Comparisons

struct Comparison {
  double diff = 0;         // a - b of the mode means
  double combined_std = 0; // sqrt(std_a^2 + std_b^2)
  double paired_mean = 0;  // mean over circuits of a_c - b_c
  double paired_std = 0;   // sample std of a_c - b_c
};

struct Verdict {
  std::size_t n = 0;
  std::size_t tau_e = 0;
  Comparison ler_dist_direct, ler_dist_mono, depth_dist_mono, depth_dist_direct;
  bool dist_ler_better_than_direct = false;  // more than one combined std below
  bool dist_ler_le_mono = false;             // not above mono by more than one combined std
  bool dist_ler_within_mono = false;         // within one combined std either way
  bool dist_depth_lt_mono = false;
  bool dist_depth_lt_direct = false;
};

namespace detail {

inline Comparison compare(const SweepRow& a, const SweepRow& b, bool ler) {
  Comparison c;
  c.diff = ler ? a.stats.ler_mean - b.stats.ler_mean : a.stats.depth_mean - b.stats.depth_mean;
  const double sa = ler ? a.stats.ler_std : a.stats.depth_std, sb = ler ? b.stats.ler_std : b.stats.depth_std;
  c.combined_std = std::sqrt(sa * sa + sb * sb);
  if (a.circuit_seeds == b.circuit_seeds && a.stats.circuits.size() == b.stats.circuits.size()) {
    std::vector<double> d;
    for (std::size_t i = 0; i < a.stats.circuits.size(); ++i) {
      const auto& x = a.stats.circuits[i];
      const auto& y = b.stats.circuits[i];
      d.push_back(ler ? x.ler() - y.ler() : x.mean_depth() - y.mean_depth());
    }
    std::tie(c.paired_mean, c.paired_std) = mean_std(d);
  } else {
    c.paired_mean = std::nan("");
    c.paired_std = std::nan("");
  }
  return c;
}

}  // namespace detail

/// One verdict per (n, tau_e); all three modes must be present.
inline std::vector<Verdict> compare_modes(const SweepResult& res) {
  std::vector<Verdict> out;
  for (const auto& row : res.rows) {
    if (row.mode != Mode::Distributed) continue;
    const auto* direct = res.find(Mode::Direct, row.n, row.tau_e);
    const auto* mono = res.find(Mode::Monolithic, row.n, row.tau_e);
    if (!direct || !mono) throw std::invalid_argument("compare_modes needs all three modes");
    Verdict v;
    v.n = row.n;
    v.tau_e = row.tau_e;
    v.ler_dist_direct = detail::compare(row, *direct, true);
    v.ler_dist_mono = detail::compare(row, *mono, true);
    v.depth_dist_mono = detail::compare(row, *mono, false);
    v.depth_dist_direct = detail::compare(row, *direct, false);
    v.dist_ler_better_than_direct = -v.ler_dist_direct.diff > v.ler_dist_direct.combined_std;
    v.dist_ler_le_mono = v.ler_dist_mono.diff <= v.ler_dist_mono.combined_std;
    v.dist_ler_within_mono = std::abs(v.ler_dist_mono.diff) <= v.ler_dist_mono.combined_std;
    v.dist_depth_lt_mono = v.depth_dist_mono.diff < 0;
    v.dist_depth_lt_direct = v.depth_dist_direct.diff < 0;
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("compare_modes needs all three modes");
  return out;
}

// ---------------------------------------------------------------------------
// Output

namespace detail {

inline std::string num(double x) {
  if (std::isnan(x)) return "";
  std::ostringstream os;
  os << std::setprecision(10) << x;
  return os.str();
}

}  // namespace detail

inline const char* results_header() {
  return "mode,n,tau_e,p,t,r,ler_mean,ler_std,depth_mean,depth_std,bound_mono,bound_dist,eq9_satisfied,L_required";
}

inline void write_results_csv(std::ostream& os, const SweepResult& res) {
  using detail::num;
  os << results_header() << '\n';
  for (const auto& r : res.rows) {
    os << mode_name(r.mode) << ',' << r.n << ',' << r.tau_e << ',' << num(res.config.p) << ',' << res.config.t << ','
       << res.config.r << ',' << num(r.stats.ler_mean) << ',' << num(r.stats.ler_std) << ','
       << num(r.stats.depth_mean) << ',' << num(r.stats.depth_std) << ',';
    if (r.bounds)
      os << num(r.bounds->mono) << ',' << num(r.bounds->dist) << ',' << (r.bounds->eq9 ? "true" : "false") << ','
         << r.bounds->links_required;
    else
      os << ",,,";
    os << '\n';
  }
}

inline void write_circuits_csv(std::ostream& os, const SweepResult& res) {
  using detail::num;
  os << "mode,n,tau_e,circuit,circuit_seed,shots,failures,ler,depth_mean,restart_rate,attempt_depth\n";
  for (const auto& r : res.rows) {
    for (std::size_t i = 0; i < r.stats.circuits.size(); ++i) {
      const auto& c = r.stats.circuits[i];
      os << mode_name(r.mode) << ',' << r.n << ',' << r.tau_e << ',' << i << ',' << r.circuit_seeds[i] << ','
         << c.shots << ',' << c.failures << ',' << num(c.ler()) << ',' << num(c.mean_depth()) << ','
         << num(c.restart_rate()) << ',' << num(c.attempt_depth()) << '\n';
    }
  }
}

inline void write_verdicts_csv(std::ostream& os, const std::vector<Verdict>& vs) {
  using detail::num;
  os << "n,tau_e,dist_ler_better_than_direct,dist_ler_le_mono,dist_ler_within_mono,dist_depth_lt_mono,"
        "dist_depth_lt_direct,ler_dist_minus_direct,ler_dist_minus_direct_std,ler_dist_minus_mono,"
        "ler_dist_minus_mono_std,depth_dist_minus_mono,depth_dist_minus_mono_std,depth_dist_minus_direct,"
        "depth_dist_minus_direct_std,paired_ler_dist_minus_direct,paired_ler_dist_minus_direct_std\n";
  auto b = [](bool x) { return x ? "true" : "false"; };
  for (const auto& v : vs) {
    os << v.n << ',' << v.tau_e << ',' << b(v.dist_ler_better_than_direct) << ',' << b(v.dist_ler_le_mono) << ','
       << b(v.dist_ler_within_mono) << ',' << b(v.dist_depth_lt_mono) << ',' << b(v.dist_depth_lt_direct) << ','
       << num(v.ler_dist_direct.diff) << ',' << num(v.ler_dist_direct.combined_std) << ','
       << num(v.ler_dist_mono.diff) << ',' << num(v.ler_dist_mono.combined_std) << ','
       << num(v.depth_dist_mono.diff) << ',' << num(v.depth_dist_mono.combined_std) << ','
       << num(v.depth_dist_direct.diff) << ',' << num(v.depth_dist_direct.combined_std) << ','
       << num(v.ler_dist_direct.paired_mean) << ',' << num(v.ler_dist_direct.paired_std) << '\n';
  }
}

inline nlohmann::json config_json(const ExperimentConfig& c) {
  nlohmann::json j;
  std::vector<std::string> modes;
  for (auto m : c.modes) modes.push_back(mode_name(m));
  j["mode"] = modes;
  j["n"] = c.n_values;
  j["tau_e"] = c.tau_e_values;
  j["p"] = c.p;
  j["noise"] = c.noise == NoiseModelKind::Uniform ? "uniform" : "circuit";
  j["t"] = c.t;
  j["r"] = c.r;
  j["circuits"] = c.num_circuits;
  j["shots"] = c.shots_per_circuit;
  j["engine"] = engine_name(c.engine);
  j["restart_policy"] = restart_policy_name(c.restart_policy);
  j["seed"] = c.master_seed;
  j["links"] = c.links;
  j["initial_inventory"] = c.initial_inventory;
  j["layer_cap"] = c.layer_cap;
  return j;
}

inline nlohmann::json trace_json(std::size_t n, std::size_t tau_e, const LayerRecord& rec) {
  nlohmann::json j;
  j["n"] = n;
  j["tau_e"] = tau_e;
  j["layer"] = rec.layer;
  auto& links = j["links"] = nlohmann::json::array();
  for (const auto& l : rec.links)
    links.push_back({{"available", l.available},
                     {"generated", l.generated},
                     {"consumed", l.consumed},
                     {"discarded", l.discarded}});
  auto& phases = j["phases"] = nlohmann::json::array();
  for (auto p : rec.phases) phases.push_back(phase_name(p));
  if (rec.transfer) {
    static const char* kinds[] = {"local_injection", "remote_injection", "teleport"};
    j["transfer"] = kinds[static_cast<int>(*rec.transfer)];
    j["transfer_block"] = rec.transfer_block;
  } else {
    j["transfer"] = nullptr;
  }
  j["stalled"] = rec.stalled;
  j["data_holder"] = rec.data_holder;
  return j;
}

/// Runs the sweep and writes results.csv, circuits.csv, verdicts.csv (when
/// all modes ran), manifest.json and optionally trace.ndjson to cfg.output.
inline SweepResult run_and_write(const ExperimentConfig& cfg, const ProgressSink& progress = {}) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output);
  std::error_code ec;
  fs::create_directories(dir, ec);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  std::optional<std::ofstream> trace_file;
  SweepTraceSink trace;
  if (cfg.trace) {
    trace_file.emplace(open("trace.ndjson"));
    trace = [&](std::size_t n, std::size_t tau_e, const LayerRecord& rec) {
      *trace_file << trace_json(n, tau_e, rec).dump() << '\n';
    };
  }
  const auto res = run_sweep(cfg, progress, trace);
  {
    auto f = open("results.csv");
    write_results_csv(f, res);
  }
  {
    auto f = open("circuits.csv");
    write_circuits_csv(f, res);
  }
  std::vector<std::string> files = {"results.csv", "circuits.csv"};
  const bool all_modes = std::find(cfg.modes.begin(), cfg.modes.end(), Mode::Direct) != cfg.modes.end() &&
                         std::find(cfg.modes.begin(), cfg.modes.end(), Mode::Monolithic) != cfg.modes.end() &&
                         std::find(cfg.modes.begin(), cfg.modes.end(), Mode::Distributed) != cfg.modes.end();
  if (all_modes) {
    auto f = open("verdicts.csv");
    write_verdicts_csv(f, compare_modes(res));
    files.push_back("verdicts.csv");
  }
  if (cfg.trace) files.push_back("trace.ndjson");
  nlohmann::json m;
  m["csv_schema_version"] = kCsvSchemaVersion;
  m["config"] = config_json(cfg);
  m["files"] = files;
  m["seconds"] = res.seconds;
  std::size_t violations = 0;
  for (const auto& r : res.rows) violations += r.conservation_violations;
  m["conservation_violations"] = violations;
  auto f = open("manifest.json");
  f << m.dump(2) << '\n';
  return res;
}

}  // namespace distclinr
