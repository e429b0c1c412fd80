#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "distclinr/harness.hpp"

using namespace distclinr;

namespace {

ExperimentConfig small(double p) {
  ExperimentConfig c;
  c.n_values = {4};
  c.tau_e_values = {1, 3};
  c.p = p;
  c.t = 2;
  c.r = 1;
  c.num_circuits = 3;
  c.shots_per_circuit = 20;
  c.master_seed = 99;
  c.threads = 2;
  return c;
}

std::string csv(const SweepResult& r) {
  std::ostringstream os;
  write_results_csv(os, r);
  write_circuits_csv(os, r);
  return os.str();
}

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Config, ParsesKeys) {
  std::istringstream in(R"(# sweep
mode = mono_clinr, dist_clinr
n = 30, 40
tau_e = 1,3 ,5
p = 1e-3
noise = uniform
t = 3
r = 2
circuits = 7
shots = 11
engine = reference
restart_policy = end_of_round
seed = 0x10
links = 2
trace = true   # inline comment
out = results/run1
)");
  const auto c = parse_config(in);
  EXPECT_EQ(c.modes, (std::vector<Mode>{Mode::Monolithic, Mode::Distributed}));
  EXPECT_EQ(c.n_values, (std::vector<std::size_t>{30, 40}));
  EXPECT_EQ(c.tau_e_values, (std::vector<std::size_t>{1, 3, 5}));
  EXPECT_DOUBLE_EQ(c.p, 1e-3);
  EXPECT_TRUE(c.noise_params().uniform_model());
  EXPECT_EQ(c.r, 2u);
  EXPECT_EQ(c.num_circuits, 7u);
  EXPECT_EQ(c.shots_per_circuit, 11u);
  EXPECT_EQ(c.engine, EngineKind::ReferenceTableau);
  EXPECT_EQ(c.restart_policy, RestartPolicy::EndOfRound);
  EXPECT_EQ(c.master_seed, 16u);
  EXPECT_EQ(c.links, 2u);
  EXPECT_TRUE(c.trace);
  EXPECT_EQ(c.output, "results/run1");

  std::istringstream all("mode = all\n");
  EXPECT_EQ(parse_config(all).modes.size(), 3u);
}

TEST(Config, RejectsBadInput) {
  for (const char* text : {"bogus = 1\n", "n 5\n", "n = 1\n", "shots = 0\n", "p = 2\n", "t = -1\n", "mode = fast\n",
                           "engine = gpu\n", "n = 4x\n", "trace = maybe\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(parse_config(in), std::invalid_argument) << text;
  }
}

TEST(Sweep, NoiselessRunsNeverFail) {
  auto c = small(0.0);
  c.n_values = {6};
  c.num_circuits = 2;
  c.shots_per_circuit = 5;
  const auto res = run_sweep(c);
  EXPECT_EQ(res.rows.size(), 3u * 2);
  for (const auto& r : res.rows) {
    EXPECT_EQ(r.stats.ler_mean, 0.0);
    EXPECT_EQ(r.stats.circuits.size(), 2u);
    EXPECT_EQ(r.conservation_violations, 0u);
  }
  for (const auto& v : compare_modes(res)) {
    EXPECT_EQ(v.ler_dist_direct.diff, 0.0);
    EXPECT_FALSE(v.dist_ler_better_than_direct);
    EXPECT_TRUE(v.dist_ler_within_mono);
  }
}

TEST(Sweep, ReproducibleAndThreadIndependent) {
  auto c = small(0.02);
  const auto a = csv(run_sweep(c));
  const auto b = csv(run_sweep(c));
  EXPECT_EQ(a, b);
  c.threads = 1;
  EXPECT_EQ(csv(run_sweep(c)), a);
  c.master_seed = 100;
  EXPECT_NE(csv(run_sweep(c)), a);
}

TEST(Sweep, ModesShareCircuitsAndTauEOnlyAffectsDistributed) {
  const auto res = run_sweep(small(0.02));
  const auto* d1 = res.find(Mode::Direct, 4, 1);
  const auto* d3 = res.find(Mode::Direct, 4, 3);
  const auto* m1 = res.find(Mode::Monolithic, 4, 1);
  ASSERT_TRUE(d1 && d3 && m1);
  EXPECT_EQ(d1->circuit_seeds, m1->circuit_seeds);
  EXPECT_EQ(d1->stats.ler_mean, d3->stats.ler_mean);
  EXPECT_FALSE(d1->bounds);
  ASSERT_TRUE(m1->bounds);
  EXPECT_GT(m1->bounds->delta, 0.0);
  EXPECT_GE(res.find(Mode::Distributed, 4, 3)->stats.depth_mean, res.find(Mode::Distributed, 4, 1)->stats.depth_mean);
}

TEST(Sweep, SeedsFollowHierarchy) {
  EXPECT_EQ(circuit_seed(5, 30, 2), derive_seed(derive_seed(5, 30), 2));
  EXPECT_NE(circuit_seed(5, 30, 2), circuit_seed(5, 40, 2));
  EXPECT_EQ(shot_seed(7, 3), derive_seed(7, 3));
}

TEST(CompareModes, SyntheticStats) {
  SweepResult res;
  auto row = [](Mode m, double ler, double depth) {
    SweepRow r;
    r.mode = m;
    r.n = 10;
    r.tau_e = 1;
    r.stats.ler_mean = ler;
    r.stats.ler_std = 0.01;
    r.stats.depth_mean = depth;
    return r;
  };
  res.rows = {row(Mode::Direct, 0.2, 60), row(Mode::Monolithic, 0.1, 80), row(Mode::Distributed, 0.105, 50)};
  const auto v = compare_modes(res);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_TRUE(v[0].dist_depth_lt_mono);
  EXPECT_TRUE(v[0].dist_depth_lt_direct);
  EXPECT_TRUE(v[0].dist_ler_better_than_direct);
  EXPECT_TRUE(v[0].dist_ler_within_mono);
  EXPECT_NEAR(v[0].ler_dist_mono.combined_std, std::sqrt(2.0) * 0.01, 1e-12);

  res.rows.erase(res.rows.begin());
  EXPECT_THROW(compare_modes(res), std::invalid_argument);
}

TEST(Output, VerdictsRecomputableFromCsv) {
  const auto res = run_sweep(small(0.03));
  std::ostringstream os;
  write_results_csv(os, res);
  const auto rows = read_csv(os.str());
  ASSERT_EQ(rows[0].size(), 14u);
  EXPECT_EQ(rows[0][0], "mode");
  EXPECT_EQ(rows[0][13], "L_required");
  ASSERT_EQ(rows.size(), res.rows.size() + 1);
  auto get = [&](const std::string& mode, const std::string& tau, int col) {
    for (const auto& r : rows)
      if (r[0] == mode && r[2] == tau) return std::stod(r[col]);
    throw std::runtime_error("missing row");
  };
  for (const auto& v : compare_modes(res)) {
    const auto tau = std::to_string(v.tau_e);
    const double dl = get("dist_clinr", tau, 6), ds = get("dist_clinr", tau, 7);
    const double xl = get("direct", tau, 6), xs = get("direct", tau, 7);
    EXPECT_EQ(v.dist_ler_better_than_direct, xl - dl > std::sqrt(ds * ds + xs * xs));
    EXPECT_EQ(v.dist_depth_lt_mono, get("dist_clinr", tau, 8) < get("mono_clinr", tau, 8));
  }
  for (const auto& r : rows) {
    if (r[0] == "direct") {
      EXPECT_EQ(r[10], "");
    }
  }
}

TEST(Output, WritesFiles) {
  auto c = small(0.01);
  c.trace = true;
  c.output = (std::filesystem::temp_directory_path() / "distclinr_harness_test").string();
  std::filesystem::remove_all(c.output);
  run_and_write(c);
  for (const char* f : {"results.csv", "circuits.csv", "verdicts.csv", "manifest.json", "trace.ndjson"})
    EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(c.output) / f)) << f;
  std::ifstream m(std::filesystem::path(c.output) / "manifest.json");
  const auto j = nlohmann::json::parse(m);
  EXPECT_EQ(j["csv_schema_version"], kCsvSchemaVersion);
  EXPECT_EQ(j["conservation_violations"], 0);
  std::ifstream t(std::filesystem::path(c.output) / "trace.ndjson");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(t, line)) {
    const auto rec = nlohmann::json::parse(line);
    for (const auto& l : rec["links"])
      EXPECT_EQ(l["generated"].get<long>(), l["consumed"].get<long>() + l["available"].get<long>() + l["discarded"].get<long>());
    ++lines;
  }
  EXPECT_GT(lines, 0u);
  std::filesystem::remove_all(c.output);
}
