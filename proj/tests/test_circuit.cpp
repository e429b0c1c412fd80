#include <gtest/gtest.h>

#include <set>

#include "distclinr/circuit.hpp"

using namespace distclinr;

TEST(Layer, SpecExamples) {
  Circuit c(3);
  c.add(GateKind::H, 0).add(GateKind::H, 1).add(GateKind::CX, 0, 1).add(GateKind::S, 2);
  const auto l = layer(c);
  ASSERT_EQ(l.depth(), 2u);
  EXPECT_EQ(l.layers[0].size(), 3u);
  EXPECT_EQ(l.layers[1].size(), 1u);
  EXPECT_EQ(l.layers[1][0].kind, GateKind::CX);

  Circuit chain(2);
  chain.add(GateKind::CX, 0, 1).add(GateKind::CX, 0, 1).add(GateKind::CX, 0, 1);
  EXPECT_EQ(depth(chain), 3u);
  EXPECT_EQ(depth(Circuit(4)), 0u);
}

TEST(Layer, LayersAreDisjointAndOrderPreserving) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = random_clifford_circuit(6, 40, rng);
    const auto l = layer(c);
    for (const auto& lay : l.layers) {
      std::set<std::uint32_t> seen;
      for (const auto& op : lay)
        for (auto q : support(op)) EXPECT_TRUE(seen.insert(q).second);
    }
    EXPECT_TRUE(canonically_equal(ideal_output(l.flatten()), ideal_output(c)));
  }
}

TEST(RandomCircuit, RespectsContract) {
  Rng rng(2);
  std::size_t two = 0, total = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = random_clifford_circuit(5, 25, rng);
    ASSERT_EQ(c.size(), 25u);
    for (const auto& op : c.ops()) {
      ++total;
      if (op.arity() == 2) {
        ++two;
        EXPECT_NE(op.qubits[0], op.qubits[1]);
        EXPECT_TRUE(op.kind == GateKind::CX || op.kind == GateKind::CY || op.kind == GateKind::CZ);
      } else {
        EXPECT_TRUE(op.kind == GateKind::H || op.kind == GateKind::S);
      }
      for (auto q : support(op)) EXPECT_LT(q, 5u);
    }
  }
  const double frac = double(two) / double(total);
  EXPECT_NEAR(frac, 0.5, 3 * std::sqrt(0.25 / double(total)));
}

TEST(RandomCircuit, DeterministicForSeed) {
  Rng a(99), b(99);
  EXPECT_EQ(random_clifford_circuit(8, 64, a), random_clifford_circuit(8, 64, b));
}

TEST(RandomCircuit, RejectsDegenerateShapes) {
  Rng rng(0);
  EXPECT_THROW(random_clifford_circuit(1, 5, rng), std::invalid_argument);
  EXPECT_THROW(random_clifford_circuit(3, 0, rng), std::invalid_argument);
}

TEST(SplitEqualDepth, SpecExample) {
  Circuit c(2);
  for (int i = 0; i < 10; ++i) c.add(GateKind::CX, 0, 1);
  const auto blocks = split_equal_depth(c, 3);
  ASSERT_EQ(blocks.size(), 3u);
  EXPECT_EQ(depth(blocks[0]), 4u);
  EXPECT_EQ(depth(blocks[1]), 3u);
  EXPECT_EQ(depth(blocks[2]), 3u);
  EXPECT_THROW(split_equal_depth(c, 11), std::invalid_argument);
  EXPECT_THROW(split_equal_depth(c, 0), std::invalid_argument);
}

TEST(SplitEqualDepth, ComposeRecoversCircuit) {
  Rng rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const auto c = random_clifford_circuit(6, 50, rng);
    const std::size_t d = depth(c);
    for (std::size_t t : {1u, 2u, 3u, 5u}) {
      if (t > d) continue;
      const auto blocks = split_equal_depth(c, t);
      std::size_t lo = d, hi = 0, sum = 0;
      for (const auto& b : blocks) {
        const auto bd = depth(b);
        lo = std::min(lo, bd);
        hi = std::max(hi, bd);
        sum += bd;
      }
      EXPECT_LE(hi - lo, 1u);
      EXPECT_EQ(sum, d);
      EXPECT_EQ(compose(blocks), layer(c).flatten());
      EXPECT_TRUE(canonically_equal(ideal_output(compose(blocks)), ideal_output(c)));
    }
  }
}

TEST(Compose, EmptyAndMismatched) {
  EXPECT_EQ(compose({}, 3).num_qubits(), 3u);
  EXPECT_THROW(compose({Circuit(2), Circuit(3)}), std::invalid_argument);
}

TEST(CircuitText, RoundTrip) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    auto c = random_clifford_circuit(7, 30, rng);
    c.add(GateKind::PrepZ, 3).add(GateKind::MeasZ, 2);
    c.push(GateOp::remote(GateKind::RemoteCX, 1, 0, 4, 2));
    c.push(GateOp::measure_pauli(PauliString::from_string("-XIZIIYI")));
    const auto back = from_text(to_text(c));
    EXPECT_EQ(back, c);
    EXPECT_EQ(to_text(back), to_text(c));
  }
}

TEST(CircuitText, ReportsErrors) {
  EXPECT_THROW(from_text(""), std::runtime_error);
  EXPECT_THROW(from_text("H 0\n"), std::runtime_error);
  EXPECT_THROW(from_text("n=2\nFOO 0\n"), std::runtime_error);
  EXPECT_THROW(from_text("n=2\nCX 0\n"), std::runtime_error);
  EXPECT_THROW(from_text("n=2\nH 5\n"), std::runtime_error);
  EXPECT_NO_THROW(from_text("# comment\nn=2\nH 0 # trailing\n\nCZ 0 1\n"));
}

TEST(Circuit, RejectsOutOfRangeQubits) {
  Circuit c(2);
  EXPECT_THROW(c.add(GateKind::H, 2), std::out_of_range);
  EXPECT_THROW(c.push(GateOp::measure_pauli(PauliString::from_string("XXX"))), std::invalid_argument);
}
