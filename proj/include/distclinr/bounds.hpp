#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "distclinr/arch.hpp"
#include "distclinr/rng.hpp"
#include "distclinr/synthetic.hpp"

namespace distclinr {

/// Inputs to the depth bounds. delta and q are per block.
struct BoundInputs {
  std::vector<double> delta;
  std::vector<double> q;
  std::size_t n = 0;
  double tau_e = 0;
  std::size_t links = 1;

  std::size_t t() const { return delta.size(); }

  void validate() const {
    if (delta.empty()) throw std::invalid_argument("bounds need at least one block");
    if (q.size() != delta.size()) throw std::invalid_argument("delta and q differ in length");
    for (double x : q)
      if (!(x >= 0.0 && x < 1.0)) throw std::invalid_argument("restart probability must lie in [0, 1)");
    for (double d : delta)
      if (d < 0) throw std::invalid_argument("negative RSP&V depth");
    if (links < 1) throw std::invalid_argument("need at least one link");
  }

  static BoundInputs uniform(std::size_t t, double delta, double q, std::size_t n = 0, double tau_e = 0,
                             std::size_t links = 1) {
    return {std::vector<double>(t, delta), std::vector<double>(t, q), n, tau_e, links};
  }
};

/// Expected monolithic depth: sum of delta_i/(1-q_i) plus 4t.
inline double monolithic_expected_depth(const BoundInputs& in) {
  in.validate();
  double d = 4.0 * double(in.t());
  for (std::size_t i = 0; i < in.t(); ++i) d += in.delta[i] / (1.0 - in.q[i]);
  return d;
}

/// Upper bound on the expected distributed depth. The final term is 4t; the
/// schedule simulated here also teleports the output back, which adds one
/// more transfer, so `teleport_term` selects 4(t+1).
inline double distributed_depth_bound(const BoundInputs& in, bool teleport_term = false) {
  in.validate();
  const double t = double(in.t());
  const double max_delta = *std::max_element(in.delta.begin(), in.delta.end());
  const double max_q = *std::max_element(in.q.begin(), in.q.end());
  const double rspv = max_delta * (std::log(t) + 3.0) / (1.0 - max_q);
  const double stock = double(in.n) * in.tau_e;
  return std::max(rspv, stock) + 4.0 * (teleport_term ? t + 1.0 : t);
}

/// Bound on the expected maximum of t geometric variables with success
/// probabilities at least p0.
inline double stopping_time_bound(std::size_t t, double p0) {
  if (t < 1) throw std::invalid_argument("t must be at least 1");
  if (!(p0 > 0.0 && p0 <= 1.0)) throw std::invalid_argument("p0 must lie in (0, 1]");
  return (std::log(double(t)) + 3.0) / p0;
}

/// True iff pairs arrive fast enough: n tau_e / L <= delta/(1-q) (ln t + 3).
inline bool entanglement_sufficient(std::size_t n, double tau_e, double delta, double q, std::size_t t,
                                    std::size_t links = 1) {
  if (links < 1) throw std::invalid_argument("need at least one link");
  if (!(q >= 0.0 && q < 1.0)) throw std::invalid_argument("restart probability must lie in [0, 1)");
  return double(n) * tau_e / double(links) <= delta / (1.0 - q) * (std::log(double(t)) + 3.0);
}

/// Smallest L making entanglement_sufficient true.
inline std::size_t required_parallel_links(std::size_t t, std::size_t n, double tau_e, double delta, double q) {
  if (!(q >= 0.0 && q < 1.0)) throw std::invalid_argument("restart probability must lie in [0, 1)");
  const double rhs = delta * (std::log(double(t)) + 3.0);
  if (rhs <= 0.0) {
    if (double(n) * tau_e <= 0.0) return 1;
    throw std::invalid_argument("no finite link count suffices for zero RSP&V depth");
  }
  // Guard against the ceiling landing one above an exact boundary.
  const double raw = double(n) * tau_e * (1.0 - q) / rhs;
  auto links = static_cast<std::size_t>(std::max(1.0, std::ceil(raw - 1e-12)));
  while (!entanglement_sufficient(n, tau_e, delta, q, t, links)) ++links;
  return links;
}

// ---------------------------------------------------------------------------
// Monte Carlo checks

struct DepthSample {
  double mean = 0;
  double std = 0;
  double max = 0;
  std::size_t trials = 0;
  std::size_t conservation_violations = 0;
  /// Stalled layers during injections 2..t, summed over trials.
  std::uint64_t late_stalls = 0;
  /// Trials whose depth exceeded the threshold passed to the sampler.
  std::size_t above_threshold = 0;
};

namespace detail {

inline std::vector<std::size_t> as_layers(const std::vector<double>& delta) {
  std::vector<std::size_t> out;
  for (double d : delta) {
    if (d < 0 || d != std::floor(d)) throw std::invalid_argument("synthetic depths must be whole layers");
    out.push_back(static_cast<std::size_t>(d));
  }
  return out;
}

inline void finish(DepthSample& s, double sum, double sum_sq) {
  const double n = double(s.trials);
  s.mean = sum / n;
  s.std = s.trials > 1 ? std::sqrt(std::max(0.0, (sum_sq - sum * sum / n) / (n - 1))) : 0.0;
}

}  // namespace detail

/// Mean monolithic depth over synthetic runs with geometric restarts.
inline DepthSample sample_monolithic_depth(const BoundInputs& in, std::size_t trials, std::uint64_t seed) {
  in.validate();
  const auto delta = detail::as_layers(in.delta);
  DepthSample s;
  s.trials = trials;
  double sum = 0, sum_sq = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    SyntheticWorkload w(delta, in.q, std::max<std::size_t>(in.n, 1), derive_seed(seed, i));
    const double d = double(MonolithicScheduler().run(w).total_depth);
    sum += d;
    sum_sq += d * d;
    s.max = std::max(s.max, d);
  }
  detail::finish(s, sum, sum_sq);
  return s;
}

/// Mean distributed depth over synthetic runs on the ring, starting from an
/// empty inventory. `trace` receives every layer of every run.
inline DepthSample sample_distributed_depth(const BoundInputs& in, std::size_t trials, std::uint64_t seed,
                                            const TraceSink& trace = {},
                                            double threshold = std::numeric_limits<double>::infinity()) {
  in.validate();
  if (in.tau_e != std::floor(in.tau_e) || in.tau_e < 0) throw std::invalid_argument("tau_e must be whole layers");
  const auto delta = detail::as_layers(in.delta);
  const std::size_t n = std::max<std::size_t>(in.n, 1);
  const auto arch = ArchConfig::for_clinr(n, in.t(), static_cast<std::size_t>(in.tau_e), in.links);
  RingScheduler ring(arch);
  DepthSample s;
  s.trials = trials;
  double sum = 0, sum_sq = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    SyntheticWorkload w(delta, in.q, n, derive_seed(seed, i));
    const auto r = ring.run(w, trace);
    const double d = double(r.total_depth);
    sum += d;
    sum_sq += d * d;
    s.max = std::max(s.max, d);
    s.above_threshold += d > threshold;
    s.conservation_violations += r.conservation_violations;
    for (std::size_t k = 1; k < r.injections.size(); ++k) s.late_stalls += r.injections[k].stalled_layers;
  }
  detail::finish(s, sum, sum_sq);
  return s;
}

/// Mean of max_i T_i where T_i ~ Geometric(p_i) on {1, 2, ...}.
inline double sample_max_geometric(const std::vector<double>& p, std::size_t trials, std::uint64_t seed) {
  if (p.empty()) throw std::invalid_argument("need at least one variable");
  Rng rng(seed);
  std::vector<std::geometric_distribution<std::uint64_t>> dists;
  for (double x : p) {
    if (!(x > 0.0 && x <= 1.0)) throw std::invalid_argument("success probability must lie in (0, 1]");
    if (x < 1.0) dists.emplace_back(x);  // p = 1 always gives T = 1
  }
  double sum = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    std::uint64_t m = 1;
    for (auto& d : dists) m = std::max<std::uint64_t>(m, d(rng) + 1);
    sum += double(m);
  }
  return sum / double(trials);
}

}  // namespace distclinr
