#pragma once

#include <algorithm>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "distclinr/gate.hpp"
#include "distclinr/rng.hpp"
#include "distclinr/tableau.hpp"

namespace distclinr {

/// Ordered list of ops on `num_qubits` qubits. The size s of the circuit is
/// ops.size().
class Circuit {
 public:
  Circuit() = default;
  explicit Circuit(std::size_t num_qubits) : n_(num_qubits) {}

  std::size_t num_qubits() const noexcept { return n_; }
  std::size_t size() const noexcept { return ops_.size(); }
  bool empty() const noexcept { return ops_.empty(); }
  const std::vector<GateOp>& ops() const noexcept { return ops_; }

  Circuit& push(GateOp op) {
    validate(op);
    ops_.push_back(std::move(op));
    return *this;
  }
  Circuit& add(GateKind k, std::uint32_t q) { return push(GateOp::one(k, q)); }
  Circuit& add(GateKind k, std::uint32_t a, std::uint32_t b) { return push(GateOp::two(k, a, b)); }

  friend bool operator==(const Circuit& a, const Circuit& b) {
    if (a.n_ != b.n_ || a.ops_.size() != b.ops_.size()) return false;
    for (std::size_t i = 0; i < a.ops_.size(); ++i) {
      const auto &x = a.ops_[i], &y = b.ops_[i];
      if (x.kind != y.kind || x.qubits[0] != y.qubits[0] || (x.arity() == 2 && x.qubits[1] != y.qubits[1]))
        return false;
    }
    return true;
  }

 private:
  void validate(const GateOp& op) const {
    if (op.kind == GateKind::MeasPauli) {
      if (!op.observable || op.observable->num_qubits() != n_)
        throw std::invalid_argument("MeasPauli observable does not match circuit width");
      return;
    }
    for (std::size_t i = 0; i < op.arity(); ++i) detail::check_qubit(op.qubits[i], n_);
  }

  std::size_t n_ = 0;
  std::vector<GateOp> ops_;
};

/// Qubits touched by an op (MeasPauli touches the observable's support).
inline std::vector<std::uint32_t> support(const GateOp& op) {
  if (op.kind == GateKind::MeasPauli) {
    std::vector<std::uint32_t> s;
    for (std::size_t q = 0; q < op.observable->num_qubits(); ++q)
      if (op.observable->x(q) || op.observable->z(q)) s.push_back(static_cast<std::uint32_t>(q));
    return s;
  }
  if (op.arity() == 2) return {op.qubits[0], op.qubits[1]};
  return {op.qubits[0]};
}

/// Layers of pairwise qubit-disjoint ops. depth() is the layer count.
struct LayeredCircuit {
  std::size_t num_qubits = 0;
  std::vector<std::vector<GateOp>> layers;

  std::size_t depth() const noexcept { return layers.size(); }

  Circuit flatten() const {
    Circuit c(num_qubits);
    for (const auto& l : layers)
      for (const auto& op : l) c.push(op);
    return c;
  }
};

/// Greedy ASAP layering: each op goes in the first layer after every earlier
/// op that shares a qubit with it.
inline LayeredCircuit layer(const Circuit& circuit) {
  LayeredCircuit out{circuit.num_qubits(), {}};
  std::vector<std::size_t> next_free(circuit.num_qubits(), 0);
  for (const auto& op : circuit.ops()) {
    const auto sup = support(op);
    std::size_t slot = 0;
    for (auto q : sup) slot = std::max(slot, next_free[q]);
    if (slot >= out.layers.size()) out.layers.resize(slot + 1);
    out.layers[slot].push_back(op);
    for (auto q : sup) next_free[q] = slot + 1;
  }
  return out;
}

inline std::size_t depth(const Circuit& c) { return layer(c).depth(); }

/// Gate mix used when drawing random Clifford circuits.
struct GateDistribution {
  double two_qubit_fraction = 0.5;
  std::vector<GateKind> single_qubit{GateKind::H, GateKind::S};
  std::vector<GateKind> two_qubit{GateKind::CX, GateKind::CY, GateKind::CZ};
};

inline Circuit random_clifford_circuit(std::size_t n, std::size_t size, Rng& rng,
                                       const GateDistribution& dist = {}) {
  if (n < 2) throw std::invalid_argument("random circuits need at least 2 qubits");
  if (size < 1) throw std::invalid_argument("random circuits need at least one gate");
  Circuit c(n);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (std::size_t g = 0; g < size; ++g) {
    if (coin(rng) < dist.two_qubit_fraction) {
      const auto kind = dist.two_qubit[uniform_below(rng, dist.two_qubit.size())];
      const auto a = static_cast<std::uint32_t>(uniform_below(rng, n));
      auto b = static_cast<std::uint32_t>(uniform_below(rng, n - 1));
      if (b >= a) ++b;
      c.add(kind, a, b);
    } else {
      const auto kind = dist.single_qubit[uniform_below(rng, dist.single_qubit.size())];
      c.add(kind, static_cast<std::uint32_t>(uniform_below(rng, n)));
    }
  }
  return c;
}

/// Cuts the ASAP layering into t contiguous blocks whose depths differ by at
/// most one; earlier blocks take the extra layers.
inline std::vector<Circuit> split_equal_depth(const Circuit& circuit, std::size_t t) {
  if (t < 1) throw std::invalid_argument("need at least one subcircuit");
  const auto layered = layer(circuit);
  const std::size_t d = layered.depth();
  if (t > d) throw std::invalid_argument("cannot split a depth-" + std::to_string(d) + " circuit into " + std::to_string(t) + " blocks");
  std::vector<Circuit> blocks;
  blocks.reserve(t);
  std::size_t cursor = 0;
  for (std::size_t k = 0; k < t; ++k) {
    const std::size_t len = d / t + (k < d % t ? 1 : 0);
    Circuit block(circuit.num_qubits());
    for (std::size_t l = cursor; l < cursor + len; ++l)
      for (const auto& op : layered.layers[l]) block.push(op);
    blocks.push_back(std::move(block));
    cursor += len;
  }
  return blocks;
}

inline Circuit compose(const std::vector<Circuit>& blocks, std::size_t num_qubits_if_empty = 0) {
  if (blocks.empty()) return Circuit(num_qubits_if_empty);
  Circuit out(blocks.front().num_qubits());
  for (const auto& b : blocks) {
    if (b.num_qubits() != out.num_qubits()) throw std::invalid_argument("cannot compose circuits of different widths");
    for (const auto& op : b.ops()) out.push(op);
  }
  return out;
}

/// Noise-free action of a unitary circuit on a tableau.
inline void run_ideal(const Circuit& c, StabilizerTableau& state, Rng* rng = nullptr) {
  for (const auto& op : c.ops()) state.apply(op, rng);
}

inline StabilizerTableau ideal_output(const Circuit& c) {
  StabilizerTableau t(c.num_qubits());
  run_ideal(c, t);
  return t;
}

// ---------------------------------------------------------------------------
// Text format: header "n=<int>", then one op per line "KIND q0 [q1]".
// Remote ops append "@a:b" locations; MeasPauli lines carry the observable.

inline void write_circuit(std::ostream& os, const Circuit& c) {
  os << "n=" << c.num_qubits() << '\n';
  for (const auto& op : c.ops()) {
    os << gate_name(op.kind);
    if (op.kind == GateKind::MeasPauli) {
      os << ' ' << op.observable->str();
    } else {
      os << ' ' << op.qubits[0];
      if (op.arity() == 2) os << ' ' << op.qubits[1];
      if (is_remote(op.kind)) os << " @" << op.location << ':' << op.peer;
    }
    os << '\n';
  }
}

inline std::string to_text(const Circuit& c) {
  std::ostringstream os;
  write_circuit(os, c);
  return os.str();
}

inline Circuit read_circuit(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) {
    throw std::runtime_error("circuit text line " + std::to_string(lineno) + ": " + why);
  };
  std::optional<Circuit> c;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    if (!c) {
      if (kind.rfind("n=", 0) != 0) fail("expected header n=<int>");
      try {
        c.emplace(std::stoul(kind.substr(2)));
      } catch (const std::exception&) {
        fail("bad header");
      }
      continue;
    }
    GateKind k;
    try {
      k = parse_gate_kind(kind);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
    try {
      if (k == GateKind::MeasPauli) {
        std::string obs;
        if (!(ls >> obs)) fail("missing observable");
        c->push(GateOp::measure_pauli(PauliString::from_string(obs)));
        continue;
      }
      std::uint32_t a = 0, b = 0;
      if (!(ls >> a)) fail("missing qubit index");
      if (gate_arity(k) == 2 && !(ls >> b)) fail("missing second qubit index");
      if (is_remote(k)) {
        std::string loc;
        QpuId la = 0, lb = 0;
        char colon = 0;
        if (!(ls >> loc) || loc.size() < 2 || loc[0] != '@') fail("remote op needs @a:b locations");
        std::istringstream locs(loc.substr(1));
        if (!(locs >> la >> colon >> lb) || colon != ':') fail("bad location");
        c->push(GateOp::remote(k, a, la, b, lb));
      } else if (gate_arity(k) == 2) {
        c->push(GateOp::two(k, a, b));
      } else {
        c->push(GateOp::one(k, a));
      }
    } catch (const std::runtime_error&) {
      throw;
    } catch (const std::exception& e) {
      fail(e.what());
    }
  }
  if (!c) throw std::runtime_error("circuit text: missing header");
  return std::move(*c);
}

inline Circuit from_text(const std::string& text) {
  std::istringstream is(text);
  return read_circuit(is);
}

}  // namespace distclinr
