#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "distclinr/distclinr.hpp"

using namespace distclinr;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitLayerCap = 3;

int simulate(const std::string& config_path, const std::optional<std::uint64_t>& seed,
             const std::optional<std::string>& out, const std::optional<std::string>& engine, bool trace,
             const std::optional<std::size_t>& threads, bool quiet) {
  auto cfg = load_config(config_path);
  if (seed) cfg.master_seed = *seed;
  if (out) cfg.output = *out;
  if (engine) cfg.engine = parse_engine(*engine);
  if (trace) cfg.trace = true;
  if (threads) cfg.threads = *threads;
  cfg.validate();

  auto progress = [&](const SweepRow& r) {
    if (quiet) return;
    std::fprintf(stderr, "%-10s n=%-4zu tau_e=%-3zu ler=%.4f (%.4f) depth=%.1f (%.1f)\n", mode_name(r.mode), r.n,
                 r.tau_e, r.stats.ler_mean, r.stats.ler_std, r.stats.depth_mean, r.stats.depth_std);
  };
  const auto res = run_and_write(cfg, progress);
  if (!quiet) std::fprintf(stderr, "wrote %s in %.1fs\n", cfg.output.c_str(), res.seconds);
  write_results_csv(std::cout, res);
  return 0;
}

int bounds(const std::vector<double>& delta, std::vector<double> q, std::size_t n, double tau_e, std::size_t links) {
  if (q.size() == 1 && delta.size() > 1) q.assign(delta.size(), q[0]);
  BoundInputs in{delta, q, n, tau_e, links};
  in.validate();
  const double max_delta = *std::max_element(delta.begin(), delta.end());
  const double max_q = *std::max_element(q.begin(), q.end());
  nlohmann::json j;
  j["t"] = in.t();
  j["monolithic_expected_depth"] = monolithic_expected_depth(in);
  j["distributed_depth_bound"] = distributed_depth_bound(in);
  j["distributed_depth_bound_with_teleport"] = distributed_depth_bound(in, true);
  j["stopping_time_bound"] = stopping_time_bound(in.t(), 1.0 - max_q);
  j["entanglement_sufficient"] = entanglement_sufficient(n, tau_e, max_delta, max_q, in.t(), links);
  j["required_parallel_links"] =
      max_delta > 0 ? nlohmann::json(required_parallel_links(in.t(), n, tau_e, max_delta, max_q)) : nlohmann::json();
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Direct, monolithic and distributed CliNR simulator for random Clifford circuits"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Run a sweep described by a config file");
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out, engine;
  std::optional<std::size_t> threads;
  bool trace = false, quiet = false;
  sim->add_option("--config", config, "key = value config file")->required()->check(CLI::ExistingFile);
  sim->add_option("--seed", seed, "Master seed (overrides the config)");
  sim->add_option("--out", out, "Output directory (overrides the config)");
  sim->add_option("--engine", engine, "frame or reference")->check(CLI::IsMember({"frame", "reference"}));
  sim->add_option("--threads", threads, "Worker threads, 0 for all cores");
  sim->add_flag("--trace", trace, "Write trace.ndjson for distributed points");
  sim->add_flag("-q,--quiet", quiet, "No progress output");

  auto* bnd = app.add_subcommand("bounds", "Evaluate the depth bounds for given block parameters");
  std::vector<double> delta, q = {0.0};
  std::size_t n = 0, links = 1;
  double tau_e = 0;
  bnd->add_option("--delta", delta, "RSP&V depth per block (one value per block)")->required()->delimiter(',');
  bnd->add_option("--q", q, "Restart probability per block, or one value for all")->delimiter(',');
  bnd->add_option("--n", n, "Qubits");
  bnd->add_option("--tau-e", tau_e, "Layers per generated Bell pair");
  bnd->add_option("--links", links, "Parallel links per connection");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sim) return simulate(config, seed, out, engine, trace, threads, quiet);
    return bounds(delta, q, n, tau_e, links);
  } catch (const LayerCapExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitLayerCap;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
