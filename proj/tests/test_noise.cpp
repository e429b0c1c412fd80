#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "distclinr/noise.hpp"

using namespace distclinr;

namespace {

// Two-sided binomial check at 3 sigma.
void expect_rate(std::uint64_t hits, std::uint64_t trials, double rate) {
  const double sigma = std::sqrt(rate * (1 - rate) / double(trials));
  EXPECT_NEAR(double(hits) / double(trials), rate, 3 * sigma) << hits << "/" << trials;
}

}  // namespace

TEST(NoiseParams, RatesPerModel) {
  const auto c = NoiseParams::circuit_level(1e-3);
  EXPECT_DOUBLE_EQ(c.rate_1q(), 1e-4);
  EXPECT_DOUBLE_EQ(c.rate_2q(), 1e-3);
  EXPECT_DOUBLE_EQ(c.rate_remote(), 3e-3);
  EXPECT_DOUBLE_EQ(c.rate_idle(), 1e-5);
  EXPECT_DOUBLE_EQ(c.rate_meas_flip(), 1e-4);
  const auto u = NoiseParams::uniform(1e-3);
  for (auto ch : {NoiseChannel::OneQubit, NoiseChannel::TwoQubit, NoiseChannel::Remote, NoiseChannel::MeasFlip})
    EXPECT_DOUBLE_EQ(u.rate(ch), 1e-3);
  EXPECT_DOUBLE_EQ(u.rate_idle(), 0.0);
  EXPECT_THROW(NoiseParams::circuit_level(-0.1), std::invalid_argument);
  EXPECT_THROW(NoiseParams::uniform(1.5), std::invalid_argument);
}

TEST(SampleOpError, NoiselessIsIdentity) {
  Rng rng(1);
  const auto params = NoiseParams::noiseless();
  for (int i = 0; i < 1000; ++i) {
    EXPECT_TRUE(sample_op_error(GateOp::two(GateKind::CX, 0, 1), params, rng, 2).is_identity());
    EXPECT_FALSE(sample_meas_flip(params, rng));
  }
}

TEST(SampleOpError, TwoQubitErrorsAreUniform) {
  // Chi-square over the 15 non-identity Paulis, 14 dof, 1% critical value 29.14.
  Rng rng(2);
  const auto params = NoiseParams::circuit_level(1.0);
  std::array<std::uint64_t, 16> counts{};
  const int draws = 1'000'000;
  for (int i = 0; i < draws; ++i) {
    const auto e = sample_op_error(GateOp::two(GateKind::CZ, 0, 1), params, rng, 2);
    const int code = int(e.x(0)) | int(e.z(0)) << 1 | int(e.x(1)) << 2 | int(e.z(1)) << 3;
    ++counts[code];
  }
  EXPECT_EQ(counts[0], 0u);
  double chi2 = 0;
  const double expected = draws / 15.0;
  for (int c = 1; c < 16; ++c) chi2 += (counts[c] - expected) * (counts[c] - expected) / expected;
  EXPECT_LT(chi2, 29.14);
}

TEST(SampleOpError, RatesByKind) {
  Rng rng(3);
  const auto params = NoiseParams::circuit_level(1e-2);
  const std::uint64_t trials = 2'000'000;
  std::uint64_t one = 0, two = 0, remote = 0, meas = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    one += !sample_op_error(GateOp::one(GateKind::H, 0), params, rng, 2).is_identity();
    two += !sample_op_error(GateOp::two(GateKind::CX, 0, 1), params, rng, 2).is_identity();
    remote += !sample_op_error(GateOp::remote(GateKind::RemoteCX, 0, 0, 1, 1), params, rng, 2).is_identity();
    meas += !sample_op_error(GateOp::one(GateKind::MeasZ, 0), params, rng, 2).is_identity();
  }
  expect_rate(one, trials, 1e-3);
  expect_rate(two, trials, 1e-2);
  expect_rate(remote, trials, 3e-2);
  EXPECT_EQ(meas, 0u);
}

TEST(SampleOpError, RemoteRateAtLowNoise) {
  Rng rng(4);
  const auto params = NoiseParams::circuit_level(1e-4);
  const std::uint64_t trials = 10'000'000;
  std::uint64_t hits = 0;
  const auto op = GateOp::remote(GateKind::RemoteCX, 0, 0, 1, 1);
  for (std::uint64_t i = 0; i < trials; ++i) hits += !sample_op_error(op, params, rng, 2).has_trivial_masks();
  expect_rate(hits, trials, 3e-4);
}

TEST(SampleMeasFlip, Frequencies) {
  Rng rng(5);
  const std::uint64_t trials = 10'000'000;
  std::uint64_t c = 0, u = 0;
  const auto cl = NoiseParams::circuit_level(1e-3), un = NoiseParams::uniform(1e-3);
  for (std::uint64_t i = 0; i < trials; ++i) {
    c += sample_meas_flip(cl, rng);
    u += sample_meas_flip(un, rng);
  }
  expect_rate(c, trials, 1e-4);
  expect_rate(u, trials, 1e-3);
}

TEST(SampleIdleErrors, Examples) {
  Rng rng(6);
  EXPECT_TRUE(sample_idle_errors({}, NoiseParams::circuit_level(0.5), rng, 4).empty());
  std::vector<std::uint32_t> idle(100);
  for (std::uint32_t q = 0; q < 100; ++q) idle[q] = q;
  EXPECT_TRUE(sample_idle_errors(idle, NoiseParams::uniform(0.5), rng, 100).empty());

  const auto params = NoiseParams::circuit_level(1e-2);
  const int layers = 100'000;
  std::uint64_t total = 0;
  for (int l = 0; l < layers; ++l) {
    const auto errs = sample_idle_errors(idle, params, rng, 100);
    for (const auto& e : errs) EXPECT_EQ(e.weight(), 1u);
    total += errs.size();
  }
  expect_rate(total, std::uint64_t(layers) * 100, 1e-4);
}

TEST(NoiseSampler, HitFrequencyMatchesRate) {
  NoiseSampler s(NoiseParams::circuit_level(0.02), 7);
  const std::uint64_t trials = 2'000'000;
  std::uint64_t one = 0, two = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    one += s.hit(NoiseChannel::OneQubit);
    two += s.hit(NoiseChannel::TwoQubit);
  }
  expect_rate(one, trials, 0.002);
  expect_rate(two, trials, 0.02);
}

TEST(NoiseSampler, BulkTrialsMatchSingleTrials) {
  // for_each_hit over k trials consumes exactly the countdown that k calls to
  // hit() would, so the two sequences are identical for one seed.
  NoiseSampler a(NoiseParams::circuit_level(0.3), 11), b(NoiseParams::circuit_level(0.3), 11);
  for (int round = 0; round < 2000; ++round) {
    const std::uint64_t k = round % 13;
    std::vector<std::uint64_t> bulk, single;
    a.for_each_hit(NoiseChannel::Idle, k, [&](std::uint64_t i) { bulk.push_back(i); });
    for (std::uint64_t i = 0; i < k; ++i)
      if (b.hit(NoiseChannel::Idle)) single.push_back(i);
    ASSERT_EQ(bulk, single);
  }
}

TEST(NoiseSampler, ZeroAndOneRates) {
  NoiseSampler zero(NoiseParams::noiseless(), 1);
  int calls = 0;
  zero.for_each_hit(NoiseChannel::TwoQubit, 1'000'000, [&](std::uint64_t) { ++calls; });
  EXPECT_EQ(calls, 0);
  NoiseSampler full(NoiseParams::uniform(1.0), 1);
  full.for_each_hit(NoiseChannel::TwoQubit, 50, [&](std::uint64_t) { ++calls; });
  EXPECT_EQ(calls, 50);
}
