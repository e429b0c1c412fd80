#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "distclinr/circuit.hpp"
#include "distclinr/tableau.hpp"

namespace distclinr {

enum class RestartPolicy { Immediate, EndOfRound };

struct ClinrConfig {
  std::size_t t = 1;
  std::size_t r = 0;
  RestartPolicy restart_policy = RestartPolicy::Immediate;

  void validate() const {
    if (t < 1) throw std::invalid_argument("CliNR needs at least one subcircuit");
  }
};

// Local coordinates of a resource register of width 2n+1: the first half
// [0, n), the second half [n, 2n) that carries C_i, and the ancilla at 2n.

/// Bell pairs on (j, n+j) followed by C_i on the second half. Depth is
/// depth(C_i) + 3.
inline Circuit build_rsp(const Circuit& sub) {
  const auto n = static_cast<std::uint32_t>(sub.num_qubits());
  Circuit c(2 * n);
  for (std::uint32_t q = 0; q < 2 * n; ++q) c.add(GateKind::PrepZ, q);
  for (std::uint32_t j = 0; j < n; ++j) c.add(GateKind::H, j);
  for (std::uint32_t j = 0; j < n; ++j) c.add(GateKind::CX, j, n + j);
  for (auto op : sub.ops()) {
    op.qubits[0] += n;
    if (op.arity() == 2) op.qubits[1] += n;
    c.push(op);
  }
  return c;
}

inline StabilizerTableau resource_stabilizer_group(const Circuit& sub) { return ideal_output(build_rsp(sub)); }

/// One stabilizer measurement of the resource state through the ancilla.
struct RsvMeasurement {
  PauliString observable;  // on 2n qubits, signed; the ideal outcome is its sign
  Circuit circuit;         // on 2n+1 qubits

  std::size_t depth() const { return observable.weight() + 4; }
  bool expected_bit() const { return observable.negative(); }
};

/// Ancilla PrepZ, H, one controlled Pauli per non-identity factor, H, MeasZ.
inline Circuit rsv_circuit(const PauliString& observable) {
  const auto w = static_cast<std::uint32_t>(observable.num_qubits());
  const std::uint32_t anc = w;
  Circuit c(w + 1);
  c.add(GateKind::PrepZ, anc).add(GateKind::H, anc);
  for (std::uint32_t q = 0; q < w; ++q) {
    const char l = observable.at(q);
    if (l == 'X') c.add(GateKind::CX, anc, q);
    else if (l == 'Y') c.add(GateKind::CY, anc, q);
    else if (l == 'Z') c.add(GateKind::CZ, anc, q);
  }
  c.add(GateKind::H, anc).add(GateKind::MeasZ, anc);
  return c;
}

inline std::vector<RsvMeasurement> draw_rsv(const StabilizerTableau& resource, std::size_t r, Rng& rng) {
  std::vector<RsvMeasurement> out;
  out.reserve(r);
  for (std::size_t i = 0; i < r; ++i) {
    auto obs = random_stabilizer(resource, rng);
    auto circ = rsv_circuit(obs);
    out.push_back({std::move(obs), std::move(circ)});
  }
  return out;
}

inline std::vector<RsvMeasurement> build_rsv(const Circuit& sub, std::size_t r, Rng& rng) {
  return draw_rsv(resource_stabilizer_group(sub), r, rng);
}

/// Images C X_j C^dag and C Z_j C^dag used to undo the injection byproducts.
struct CorrectionImages {
  std::vector<PauliString> x, z;

  /// C X^b Z^a C^dag for measured bits a (data side) and b (resource side).
  PauliString correction(const std::vector<bool>& data_bits, const std::vector<bool>& resource_bits) const {
    PauliString out(x.empty() ? 0 : x.front().num_qubits());
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (resource_bits[j]) out.xor_masks(x[j]);
      if (data_bits[j]) out.xor_masks(z[j]);
    }
    return out;
  }
};

inline CorrectionImages correction_images(const Circuit& sub) {
  const std::size_t n = sub.num_qubits();
  CorrectionImages im;
  for (std::size_t j = 0; j < n; ++j) {
    im.x.push_back(PauliString::single(n, j, 'X'));
    im.z.push_back(PauliString::single(n, j, 'Z'));
  }
  for (const auto& op : sub.ops()) {
    for (auto& p : im.x) conjugate_in_place(op, p);
    for (auto& p : im.z) conjugate_in_place(op, p);
  }
  return im;
}

/// Injection template on 3n local qubits: data [0, n), first resource half
/// [n, 2n), second half [2n, 3n). Layers: CX(data_j, res_j), H(data_j), MeasZ
/// on both, then a layer in which the frame correction is applied to the
/// second half. No gate is spent on the correction.
inline LayeredCircuit build_rsi(std::size_t n) {
  const auto m = static_cast<std::uint32_t>(n);
  LayeredCircuit l{3 * n, std::vector<std::vector<GateOp>>(4)};
  for (std::uint32_t j = 0; j < m; ++j) {
    l.layers[0].push_back(GateOp::two(GateKind::CX, j, m + j));
    l.layers[1].push_back(GateOp::one(GateKind::H, j));
    l.layers[2].push_back(GateOp::one(GateKind::MeasZ, j));
    l.layers[2].push_back(GateOp::one(GateKind::MeasZ, m + j));
  }
  return l;
}

enum class RsvVerdict { Accept, Restart };

struct RsvDecision {
  RsvVerdict verdict = RsvVerdict::Accept;
  std::size_t executed = 0;  // measurements actually run
};

/// `nontrivial[i]` is true when measurement i reported a violated stabilizer.
inline RsvDecision restart_semantics(RestartPolicy policy, std::span<const bool> nontrivial) {
  RsvDecision d;
  for (std::size_t i = 0; i < nontrivial.size(); ++i) {
    ++d.executed;
    if (nontrivial[i]) {
      d.verdict = RsvVerdict::Restart;
      if (policy == RestartPolicy::Immediate) return d;
    }
  }
  return d;
}

/// Everything the engines need about one subcircuit.
struct ResourceBlock {
  Circuit subcircuit;
  Circuit rsp;
  LayeredCircuit rsp_layers;
  StabilizerTableau resource;
  CorrectionImages images;
  std::vector<RsvMeasurement> rsv;  // one representative draw
  std::size_t delta = 0;            // RSP&V depth of that draw without restarts
  double restart_prob_estimate = std::numeric_limits<double>::quiet_NaN();

  std::size_t rsp_depth() const { return rsp_layers.depth(); }
};

inline std::size_t rspv_depth(std::size_t rsp_depth, const std::vector<RsvMeasurement>& rsv) {
  std::size_t d = rsp_depth;
  for (const auto& m : rsv) d += m.depth();
  return d;
}

inline ResourceBlock build_resource_block(const Circuit& sub, std::size_t r, Rng& rng) {
  ResourceBlock b;
  b.subcircuit = sub;
  b.rsp = build_rsp(sub);
  b.rsp_layers = layer(b.rsp);
  b.resource = ideal_output(b.rsp);
  b.images = correction_images(sub);
  b.rsv = draw_rsv(b.resource, r, rng);
  b.delta = rspv_depth(b.rsp_depth(), b.rsv);
  return b;
}

}  // namespace distclinr
