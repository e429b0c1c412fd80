#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "distclinr/circuit.hpp"
#include "distclinr/tableau.hpp"
#include "oracle/statevector.hpp"

using namespace distclinr;

namespace {

void apply_to_oracle(oracle::StateVector& v, const GateOp& g) {
  const auto a = g.qubits[0], b = g.qubits[1];
  switch (g.kind) {
    case GateKind::H: v.h(a); break;
    case GateKind::S: v.s(a); break;
    case GateKind::Sdg: v.sdg(a); break;
    case GateKind::X: v.x(a); break;
    case GateKind::Y: v.y(a); break;
    case GateKind::Z: v.z(a); break;
    case GateKind::CX: v.cx(a, b); break;
    case GateKind::CY: v.cy(a, b); break;
    case GateKind::CZ: v.cz(a, b); break;
    default: FAIL() << "unsupported gate in oracle";
  }
}

Circuit random_all_gates(std::size_t n, std::size_t size, Rng& rng) {
  const std::vector<GateKind> one = {GateKind::H, GateKind::S, GateKind::Sdg, GateKind::X, GateKind::Y, GateKind::Z};
  const std::vector<GateKind> two = {GateKind::CX, GateKind::CY, GateKind::CZ};
  GateDistribution d;
  d.single_qubit = one;
  d.two_qubit = two;
  return random_clifford_circuit(n, size, rng, d);
}

void expect_stabilized_by(const StabilizerTableau& t, const oracle::StateVector& v) {
  for (const auto& s : t.stabilizers()) {
    const std::string body = s.str().substr(1);
    EXPECT_NEAR(v.expectation(body, s.sign()), 1.0, 1e-9) << s.str();
  }
}

std::string random_pauli(std::size_t n, Rng& rng) {
  std::string s;
  for (std::size_t q = 0; q < n; ++q) s += "IXYZ"[rng() % 4];
  if (s.find_first_not_of('I') == std::string::npos) s[0] = 'Z';
  return s;
}

}  // namespace

TEST(StabilizerTableau, SpecGateExamples) {
  auto t = apply_gate(StabilizerTableau(1), GateOp::one(GateKind::H, 0));
  EXPECT_EQ(t.stabilizer(0).str(), "+X");

  // |+0> has stabilizers {X0, Z1}; CX(0,1) maps them to {X0X1, Z0Z1}.
  auto plus0 = apply_gate(StabilizerTableau(2), GateOp::one(GateKind::H, 0));
  EXPECT_TRUE(in_stabilizer_group(plus0, PauliString::from_string("XI")));
  EXPECT_TRUE(in_stabilizer_group(plus0, PauliString::from_string("IZ")));
  auto bell = apply_gate(plus0, GateOp::two(GateKind::CX, 0, 1));
  EXPECT_TRUE(in_stabilizer_group(bell, PauliString::from_string("XX")));
  EXPECT_TRUE(in_stabilizer_group(bell, PauliString::from_string("ZZ")));
  EXPECT_FALSE(in_stabilizer_group(bell, PauliString::from_string("IZ")));

  auto plus = apply_gate(StabilizerTableau(1), GateOp::one(GateKind::H, 0));
  for (auto k : {GateKind::S, GateKind::S, GateKind::Z}) plus = apply_gate(plus, GateOp::one(k, 0));
  EXPECT_EQ(plus.stabilizer(0).str(), "+X");
}

TEST(StabilizerTableau, RejectsBadGates) {
  StabilizerTableau t(2);
  EXPECT_THROW(t.apply(GateOp::one(GateKind::H, 2)), std::out_of_range);
  EXPECT_THROW(t.apply(GateOp::one(GateKind::MeasZ, 0)), std::invalid_argument);
}

TEST(StabilizerTableau, AgreesWithStateVectorOracle) {
  Rng rng(2024);
  for (std::size_t n = 1; n <= 3; ++n) {
    for (int trial = 0; trial < 60; ++trial) {
      StabilizerTableau t(n);
      oracle::StateVector v(n);
      const auto c = n == 1 ? Circuit(1) : random_all_gates(n, 12, rng);
      for (const auto& op : c.ops()) {
        t.apply(op);
        apply_to_oracle(v, op);
        expect_stabilized_by(t, v);
      }
      if (n == 1) {
        for (int g = 0; g < 12; ++g) {
          const auto k = std::vector<GateKind>{GateKind::H, GateKind::S, GateKind::Sdg, GateKind::X, GateKind::Y,
                                               GateKind::Z}[rng() % 6];
          t.apply(GateOp::one(k, 0));
          apply_to_oracle(v, GateOp::one(k, 0));
          expect_stabilized_by(t, v);
        }
      }
    }
  }
}

TEST(StabilizerTableau, PrepZResetsOneQubit) {
  StabilizerTableau t(2);
  t.apply(GateOp::one(GateKind::H, 0));
  t.apply(GateOp::two(GateKind::CX, 0, 1));
  Rng rng(1);
  t.apply(GateOp::one(GateKind::PrepZ, 0), &rng);
  EXPECT_TRUE(t.contains(PauliString::from_string("ZI")));
  EXPECT_TRUE(t.contains_up_to_sign(PauliString::from_string("IZ")));
}

TEST(MeasurePauli, SpecExamples) {
  Rng rng(5);
  auto [out, t] = measure_pauli(StabilizerTableau(1), PauliString::from_string("Z"), rng);
  EXPECT_EQ(out, +1);
  int plus = 0;
  const int shots = 4000;
  for (int s = 0; s < shots; ++s) plus += measure_pauli(StabilizerTableau(1), PauliString::from_string("X"), rng).first > 0;
  EXPECT_NEAR(plus / double(shots), 0.5, 3 * std::sqrt(0.25 / shots));

  StabilizerTableau bell(2);
  bell.apply(GateOp::one(GateKind::H, 0));
  bell.apply(GateOp::two(GateKind::CX, 0, 1));
  const auto r = bell.measure(PauliString::from_string("XX"), rng);
  EXPECT_TRUE(r.deterministic);
  EXPECT_EQ(r.outcome, +1);
  EXPECT_EQ(bell.measure(PauliString::from_string("-XX"), rng).outcome, -1);
}

TEST(MeasurePauli, BornRuleMatchesOracle) {
  Rng rng(77);
  const int shots = 10000;
  for (std::size_t n = 1; n <= 3; ++n) {
    for (int trial = 0; trial < 4; ++trial) {
      const auto c = n == 1 ? Circuit(1).add(GateKind::H, 0).add(GateKind::S, 0) : random_all_gates(n, 10, rng);
      StabilizerTableau base(n);
      oracle::StateVector v(n);
      for (const auto& op : c.ops()) {
        base.apply(op);
        apply_to_oracle(v, op);
      }
      const auto obs = random_pauli(n, rng);
      const double p_plus = (1.0 + v.expectation(obs)) / 2.0;
      int plus = 0;
      for (int s = 0; s < shots; ++s) {
        auto t = base;
        const auto r = t.measure(PauliString::from_string(obs), rng);
        plus += r.outcome > 0;
        if (s < 20) {
          // Post-measurement state: the oracle collapsed onto the same outcome
          // must be stabilized by the updated tableau.
          auto w = v;
          Rng orng(s);
          int got = 0;
          do {
            w = v;
            got = w.measure(obs, orng);
          } while (got != r.outcome);
          expect_stabilized_by(t, w);
        }
      }
      const double sigma = std::sqrt(std::max(p_plus * (1 - p_plus), 1e-12) / shots);
      EXPECT_NEAR(plus / double(shots), p_plus, 3 * sigma + 1e-12) << "n=" << n << " obs=" << obs;
    }
  }
}

TEST(InStabilizerGroup, SpecExamples) {
  StabilizerTableau zero(3);
  EXPECT_TRUE(in_stabilizer_group(zero, PauliString::from_string("ZZI")));
  EXPECT_FALSE(in_stabilizer_group(zero, PauliString::from_string("XII")));
  EXPECT_FALSE(in_stabilizer_group(zero, PauliString::from_string("-ZII")));
  EXPECT_TRUE(zero.contains_up_to_sign(PauliString::from_string("-ZII")));
}

TEST(RandomStabilizer, SpecExamples) {
  Rng rng(3);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(random_stabilizer(StabilizerTableau(1), rng).str(), "+Z");

  std::map<std::string, int> counts;
  const int draws = 30000;
  for (int i = 0; i < draws; ++i) ++counts[random_stabilizer(StabilizerTableau(2), rng).str()];
  ASSERT_EQ(counts.size(), 3u);
  const double sigma = std::sqrt((1.0 / 3) * (2.0 / 3) / draws);
  for (const auto& key : {"+ZI", "+IZ", "+ZZ"}) EXPECT_NEAR(counts[key] / double(draws), 1.0 / 3, 3 * sigma) << key;
}

TEST(RandomStabilizer, AlwaysAMember) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = ideal_output(random_all_gates(5, 30, rng));
    for (int i = 0; i < 10; ++i) {
      const auto s = random_stabilizer(t, rng);
      EXPECT_FALSE(s.has_trivial_masks());
      EXPECT_TRUE(in_stabilizer_group(t, s));
    }
  }
}

TEST(CanonicalForm, SpecExamples) {
  auto a = StabilizerTableau::from_stabilizers({PauliString::from_string("XX"), PauliString::from_string("ZZ")});
  auto negneg = PauliString::from_string("-XX");
  negneg.negate();
  auto b = StabilizerTableau::from_stabilizers({negneg, PauliString::from_string("ZZ")});
  EXPECT_EQ(canonical_form(a).stabilizers(), canonical_form(b).stabilizers());

  const auto ca = canonical_form(a);
  EXPECT_EQ(canonical_form(ca).stabilizers(), ca.stabilizers());

  Circuit first(2), second(2);
  first.add(GateKind::H, 0).add(GateKind::H, 1);
  second.add(GateKind::H, 1).add(GateKind::H, 0);
  EXPECT_TRUE(canonically_equal(ideal_output(first), ideal_output(second)));
}

TEST(CanonicalForm, DistinguishesSignsAndStates) {
  auto a = StabilizerTableau::from_stabilizers({PauliString::from_string("XX"), PauliString::from_string("ZZ")});
  auto b = StabilizerTableau::from_stabilizers({PauliString::from_string("-XX"), PauliString::from_string("ZZ")});
  EXPECT_FALSE(canonically_equal(a, b));
  EXPECT_FALSE(a.same_state(b));
}

TEST(CanonicalForm, AgreesWithGroupEquality) {
  Rng rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    const auto c = random_all_gates(4, 25, rng);
    const auto t = ideal_output(c);
    // Scramble generators by random products; the state is unchanged.
    auto gens = t.stabilizers();
    for (int k = 0; k < 10; ++k) {
      const auto i = rng() % gens.size(), j = rng() % gens.size();
      if (i != j) gens[i] *= gens[j];
    }
    const auto scrambled = StabilizerTableau::from_stabilizers(gens);
    EXPECT_TRUE(canonically_equal(t, scrambled));
    EXPECT_TRUE(t.same_state(scrambled));
  }
}

TEST(FromStabilizers, ValidatesInput) {
  EXPECT_THROW(StabilizerTableau::from_stabilizers({PauliString::from_string("XI"), PauliString::from_string("ZI")}),
               std::invalid_argument);
  EXPECT_THROW(StabilizerTableau::from_stabilizers({PauliString::from_string("ZI"), PauliString::from_string("ZI")}),
               std::invalid_argument);
}

TEST(FromStabilizers, CompletesDestabilizers) {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto t = StabilizerTableau::from_stabilizers(ideal_output(random_all_gates(6, 40, rng)).stabilizers());
    const std::size_t n = t.num_qubits();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        EXPECT_EQ(t.destabilizers()[i].commutes(t.stabilizers()[j]), i != j);
        EXPECT_TRUE(t.destabilizers()[i].commutes(t.destabilizers()[j]));
        EXPECT_TRUE(t.stabilizers()[i].commutes(t.stabilizers()[j]));
      }
    }
  }
}

TEST(ReducedState, ExtractsProductFactor) {
  // (Bell pair on 0,2) x (|1> on 1) x (|+> on 3)
  StabilizerTableau t(4);
  t.apply(GateOp::one(GateKind::H, 0));
  t.apply(GateOp::two(GateKind::CX, 0, 2));
  t.apply(GateOp::one(GateKind::X, 1));
  t.apply(GateOp::one(GateKind::H, 3));
  const std::vector<std::uint32_t> pair = {0, 2};
  const auto r = reduced_state(t, pair);
  EXPECT_TRUE(r.contains(PauliString::from_string("XX")));
  EXPECT_TRUE(r.contains(PauliString::from_string("ZZ")));
  const std::vector<std::uint32_t> one = {1};
  EXPECT_TRUE(reduced_state(t, one).contains(PauliString::from_string("-Z")));
  const std::vector<std::uint32_t> entangled = {0, 1};
  EXPECT_THROW(reduced_state(t, entangled), std::invalid_argument);
}
