#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "distclinr/gate.hpp"
#include "distclinr/pauli.hpp"
#include "distclinr/rng.hpp"

namespace distclinr {

namespace detail {

inline void check_qubit(std::size_t q, std::size_t n) {
  if (q >= n) throw std::out_of_range("qubit index " + std::to_string(q) + " out of range for " + std::to_string(n) + " qubits");
}

}  // namespace detail

/// g P g^dagger for a Clifford gate g. RemoteCX acts as CX and TeleportQubit
/// as a SWAP that moves the source state onto the destination.
inline void conjugate_in_place(const GateOp& gate, PauliString& p) {
  const std::size_t n = p.num_qubits();
  const auto a = gate.qubits[0], b = gate.qubits[1];
  detail::check_qubit(a, n);
  if (gate.arity() == 2) detail::check_qubit(b, n);
  switch (gate.kind) {
    case GateKind::H: p.conj_h(a); break;
    case GateKind::S: p.conj_s(a); break;
    case GateKind::Sdg: p.conj_sdg(a); break;
    case GateKind::X: p.conj_x(a); break;
    case GateKind::Y: p.conj_y(a); break;
    case GateKind::Z: p.conj_z(a); break;
    case GateKind::CX:
    case GateKind::RemoteCX: p.conj_cx(a, b); break;
    case GateKind::CY: p.conj_cy(a, b); break;
    case GateKind::CZ: p.conj_cz(a, b); break;
    case GateKind::TeleportQubit: p.conj_swap(a, b); break;
    default:
      throw std::invalid_argument("cannot conjugate by non-unitary gate " + std::string(gate_name(gate.kind)));
  }
}

inline PauliString conjugate_pauli(const GateOp& gate, PauliString p) {
  conjugate_in_place(gate, p);
  return p;
}

struct MeasurementResult {
  int outcome = +1;  // eigenvalue, +1 or -1
  bool deterministic = true;
};

/// CHP-style stabilizer tableau: n stabilizer rows plus n destabilizer rows.
class StabilizerTableau {
 public:
  StabilizerTableau() = default;

  /// |0...0>.
  explicit StabilizerTableau(std::size_t num_qubits) : n_(num_qubits) {
    if (num_qubits == 0) throw std::invalid_argument("tableau needs at least one qubit");
    stab_.reserve(n_);
    destab_.reserve(n_);
    for (std::size_t q = 0; q < n_; ++q) {
      stab_.push_back(PauliString::single(n_, q, 'Z'));
      destab_.push_back(PauliString::single(n_, q, 'X'));
    }
  }

  /// Builds a tableau from n independent, mutually commuting, Hermitian
  /// generators. Generators are row-reduced; destabilizers are completed.
  static StabilizerTableau from_stabilizers(std::vector<PauliString> gens);

  std::size_t num_qubits() const noexcept { return n_; }
  const std::vector<PauliString>& stabilizers() const noexcept { return stab_; }
  const std::vector<PauliString>& destabilizers() const noexcept { return destab_; }
  const PauliString& stabilizer(std::size_t i) const { return stab_.at(i); }

  void apply(const GateOp& gate, Rng* rng = nullptr) {
    if (gate.kind == GateKind::PrepZ) {
      reset(gate.qubits[0], rng);
      return;
    }
    if (!is_unitary(gate.kind))
      throw std::invalid_argument("apply_gate: not a Clifford unitary or preparation: " + std::string(gate_name(gate.kind)));
    for (auto& row : stab_) conjugate_in_place(gate, row);
    for (auto& row : destab_) conjugate_in_place(gate, row);
  }

  /// Multiplies the state by a Pauli (as an error or correction). Only the
  /// signs of the stabilizers change.
  void apply_pauli(const PauliString& p) {
    for (auto& row : stab_)
      if (!row.commutes(p)) row.negate();
  }

  /// Measures a Hermitian Pauli observable. `rng` drives random outcomes.
  MeasurementResult measure(const PauliString& obs, Rng& rng) {
    check_register(obs);
    std::optional<std::size_t> pivot;
    for (std::size_t i = 0; i < n_; ++i) {
      if (!stab_[i].commutes(obs)) {
        pivot = i;
        break;
      }
    }
    if (!pivot) {
      const PauliString prod = group_product_for(obs);
      const int outcome = prod.sign() * obs.sign();
      return {outcome, true};
    }
    const std::size_t p = *pivot;
    for (std::size_t i = 0; i < n_; ++i) {
      if (i != p && !stab_[i].commutes(obs)) stab_[i] *= stab_[p];
      if (i != p && !destab_[i].commutes(obs)) destab_[i] *= stab_[p];
    }
    destab_[p] = stab_[p];
    const int outcome = (rng() & 1U) ? -1 : 1;
    PauliString row = obs;
    if (outcome < 0) row.negate();
    stab_[p] = std::move(row);
    return {outcome, false};
  }

  MeasurementResult measure_z(std::size_t q, Rng& rng) {
    detail::check_qubit(q, n_);
    return measure(PauliString::single(n_, q, 'Z'), rng);
  }

  /// Resets qubit q to |0>. The random measurement branch is irrelevant to
  /// the post-reset state, so a null rng is allowed.
  void reset(std::size_t q, Rng* rng = nullptr) {
    detail::check_qubit(q, n_);
    Rng fallback(0);
    const auto m = measure_z(q, rng ? *rng : fallback);
    if (m.outcome < 0) apply_pauli(PauliString::single(n_, q, 'X'));
  }

  /// True iff `p`, including its sign, is an element of the stabilizer group.
  bool contains(const PauliString& p) const {
    check_register(p);
    if (!p.is_hermitian()) return false;
    for (const auto& s : stab_)
      if (!s.commutes(p)) return false;
    return group_product_for(p) == p;
  }

  /// True iff +p or -p is in the stabilizer group, i.e. p acts on the state
  /// as a global phase.
  bool contains_up_to_sign(const PauliString& p) const {
    check_register(p);
    for (const auto& s : stab_)
      if (!s.commutes(p)) return false;
    return true;
  }

  /// Stabilizer-group equality (same state up to global phase).
  bool same_state(const StabilizerTableau& other) const {
    if (other.n_ != n_) return false;
    for (const auto& s : other.stab_)
      if (!contains(s)) return false;
    return true;
  }

 private:
  void check_register(const PauliString& p) const {
    if (p.num_qubits() != n_) throw std::invalid_argument("observable acts on a different register size");
  }

  // Product of the stabilizers whose destabilizer anticommutes with p. For p
  // in the group (up to sign) this reproduces p with its group sign.
  PauliString group_product_for(const PauliString& p) const {
    PauliString acc(n_);
    for (std::size_t i = 0; i < n_; ++i)
      if (!destab_[i].commutes(p)) acc *= stab_[i];
    return acc;
  }

  std::size_t n_ = 0;
  std::vector<PauliString> stab_;
  std::vector<PauliString> destab_;
};

namespace detail {

// Column c < n addresses x_c, column c >= n addresses z_{c-n}.
inline bool column_bit(const PauliString& p, std::size_t col, std::size_t n) {
  return col < n ? p.x(col) : p.z(col - n);
}

// Row-reduces `rows` in place over the given column order; returns the pivot
// column of each surviving row (rows are reordered so row i has pivot[i]).
inline std::vector<std::size_t> row_reduce(std::vector<PauliString>& rows, std::span<const std::size_t> columns,
                                           std::size_t n) {
  std::vector<std::size_t> pivots;
  std::size_t rank = 0;
  for (std::size_t col : columns) {
    std::size_t sel = rank;
    while (sel < rows.size() && !column_bit(rows[sel], col, n)) ++sel;
    if (sel == rows.size()) continue;
    std::swap(rows[rank], rows[sel]);
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (i != rank && column_bit(rows[i], col, n)) rows[i] *= rows[rank];
    pivots.push_back(col);
    if (++rank == rows.size()) break;
  }
  return pivots;
}

inline std::vector<std::size_t> natural_columns(std::size_t n) {
  std::vector<std::size_t> cols(2 * n);
  for (std::size_t c = 0; c < 2 * n; ++c) cols[c] = c;
  return cols;
}

}  // namespace detail

inline StabilizerTableau StabilizerTableau::from_stabilizers(std::vector<PauliString> gens) {
  if (gens.empty()) throw std::invalid_argument("no generators");
  const std::size_t n = gens.front().num_qubits();
  if (gens.size() != n) throw std::invalid_argument("need exactly num_qubits generators");
  for (std::size_t i = 0; i < n; ++i) {
    if (gens[i].num_qubits() != n) throw std::invalid_argument("generator register mismatch");
    if (!gens[i].is_hermitian()) throw std::invalid_argument("generators must be Hermitian");
    for (std::size_t j = 0; j < i; ++j)
      if (!gens[i].commutes(gens[j])) throw std::invalid_argument("generators do not commute");
  }
  const auto cols = detail::natural_columns(n);
  const auto pivots = detail::row_reduce(gens, cols, n);
  if (pivots.size() != n) throw std::invalid_argument("generators are not independent");

  std::vector<PauliString> destab;
  destab.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = pivots[i];
    // In reduced form only row i has a 1 in its pivot column.
    destab.push_back(c < n ? PauliString::single(n, c, 'Z') : PauliString::single(n, c - n, 'X'));
  }
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < j; ++i)
      if (!destab[i].commutes(destab[j])) destab[j] *= gens[i];
  for (auto& d : destab) d.set_sign(+1);

  StabilizerTableau t;
  t.n_ = n;
  t.stab_ = std::move(gens);
  t.destab_ = std::move(destab);
  return t;
}

// ---------------------------------------------------------------------------
// Free-function surface.

inline StabilizerTableau apply_gate(StabilizerTableau tableau, const GateOp& gate) {
  tableau.apply(gate);
  return tableau;
}

inline std::pair<int, StabilizerTableau> measure_pauli(StabilizerTableau tableau, const PauliString& observable,
                                                       Rng& rng) {
  const auto r = tableau.measure(observable, rng);
  return {r.outcome, std::move(tableau)};
}

inline bool in_stabilizer_group(const StabilizerTableau& tableau, const PauliString& pauli) {
  return tableau.contains(pauli);
}

/// Uniformly random non-identity element of the stabilizer group.
inline PauliString random_stabilizer(const StabilizerTableau& tableau, Rng& rng) {
  const std::size_t n = tableau.num_qubits();
  std::vector<bool> pick(n);
  bool any = false;
  while (!any) {
    for (std::size_t i = 0; i < n; ++i) {
      pick[i] = rng() & 1U;
      any = any || pick[i];
    }
  }
  PauliString acc(n);
  for (std::size_t i = 0; i < n; ++i)
    if (pick[i]) acc *= tableau.stabilizer(i);
  return acc;
}

/// Reduced row-echelon generators (columns x_0..x_{n-1}, z_0..z_{n-1}). Two
/// tableaux describe the same state iff their canonical forms are equal.
inline StabilizerTableau canonical_form(const StabilizerTableau& tableau) {
  return StabilizerTableau::from_stabilizers(tableau.stabilizers());
}

inline bool canonically_equal(const StabilizerTableau& a, const StabilizerTableau& b) {
  if (a.num_qubits() != b.num_qubits()) return false;
  return canonical_form(a).stabilizers() == canonical_form(b).stabilizers();
}

/// State of `qubits` when the full state factorizes as (state on qubits) x
/// (state on the rest). Throws if the subset is entangled with the rest.
inline StabilizerTableau reduced_state(const StabilizerTableau& tableau, std::span<const std::uint32_t> qubits) {
  const std::size_t n = tableau.num_qubits();
  std::vector<bool> keep(n, false);
  for (auto q : qubits) {
    detail::check_qubit(q, n);
    keep[q] = true;
  }
  std::vector<std::size_t> outside;
  for (std::size_t q = 0; q < n; ++q) {
    if (!keep[q]) {
      outside.push_back(q);
      outside.push_back(q + n);
    }
  }
  std::vector<PauliString> rows = tableau.stabilizers();
  const auto pivots = detail::row_reduce(rows, outside, n);
  std::vector<PauliString> local;
  for (std::size_t i = pivots.size(); i < rows.size(); ++i) local.push_back(rows[i].gather(qubits));
  if (local.size() != qubits.size()) throw std::invalid_argument("qubit subset is entangled with the rest of the register");
  return StabilizerTableau::from_stabilizers(std::move(local));
}

}  // namespace distclinr
