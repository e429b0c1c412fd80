#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "distclinr/pauli.hpp"

namespace distclinr {

enum class GateKind : std::uint8_t {
  PrepZ,
  H,
  S,
  Sdg,
  X,
  Y,
  Z,
  CX,
  CY,
  CZ,
  MeasZ,
  MeasPauli,
  RemoteCX,
  TeleportQubit,
};

inline constexpr std::array<std::string_view, 14> kGateNames = {
    "PrepZ", "H", "S", "Sdg", "X", "Y", "Z", "CX", "CY", "CZ", "MeasZ", "MeasPauli", "RemoteCX", "TeleportQubit"};

constexpr std::string_view gate_name(GateKind k) { return kGateNames[static_cast<std::size_t>(k)]; }

inline GateKind parse_gate_kind(std::string_view name) {
  for (std::size_t i = 0; i < kGateNames.size(); ++i)
    if (kGateNames[i] == name) return static_cast<GateKind>(i);
  throw std::invalid_argument("unknown gate kind '" + std::string(name) + "'");
}

constexpr std::size_t gate_arity(GateKind k) {
  switch (k) {
    case GateKind::CX:
    case GateKind::CY:
    case GateKind::CZ:
    case GateKind::RemoteCX:
    case GateKind::TeleportQubit:
      return 2;
    case GateKind::MeasPauli:
      return 0;
    default:
      return 1;
  }
}

constexpr bool is_two_qubit(GateKind k) { return gate_arity(k) == 2; }
constexpr bool is_remote(GateKind k) { return k == GateKind::RemoteCX || k == GateKind::TeleportQubit; }
constexpr bool is_measurement(GateKind k) { return k == GateKind::MeasZ || k == GateKind::MeasPauli; }
constexpr bool is_unitary(GateKind k) { return k != GateKind::PrepZ && !is_measurement(k); }

using QpuId = std::int32_t;
inline constexpr QpuId kMonolithic = -1;

/// One operation of the circuit IR.
///
/// `location` names the QPU executing the op; remote ops additionally carry
/// the `peer` QPU at the other end of the link. For MeasPauli the measured
/// observable is shared, immutable data.
struct GateOp {
  GateKind kind = GateKind::H;
  std::array<std::uint32_t, 2> qubits{0, 0};
  QpuId location = kMonolithic;
  QpuId peer = kMonolithic;
  std::shared_ptr<const PauliString> observable;

  static GateOp one(GateKind k, std::uint32_t q, QpuId loc = kMonolithic) {
    if (gate_arity(k) != 1) throw std::invalid_argument("gate arity mismatch");
    return GateOp{k, {q, q}, loc, loc, nullptr};
  }
  static GateOp two(GateKind k, std::uint32_t a, std::uint32_t b, QpuId loc = kMonolithic) {
    if (gate_arity(k) != 2) throw std::invalid_argument("gate arity mismatch");
    if (a == b) throw std::invalid_argument("two-qubit gate on a single qubit");
    if (is_remote(k)) throw std::invalid_argument("remote gates need two locations");
    return GateOp{k, {a, b}, loc, loc, nullptr};
  }
  static GateOp remote(GateKind k, std::uint32_t a, QpuId loc_a, std::uint32_t b, QpuId loc_b) {
    if (!is_remote(k)) throw std::invalid_argument("not a remote gate kind");
    if (a == b) throw std::invalid_argument("two-qubit gate on a single qubit");
    if (loc_a == loc_b || loc_a == kMonolithic || loc_b == kMonolithic)
      throw std::invalid_argument("remote gates need two distinct QPU locations");
    return GateOp{k, {a, b}, loc_a, loc_b, nullptr};
  }
  static GateOp measure_pauli(PauliString observable) {
    return GateOp{GateKind::MeasPauli, {0, 0}, kMonolithic, kMonolithic,
                  std::make_shared<const PauliString>(std::move(observable))};
  }

  std::size_t arity() const { return gate_arity(kind); }
};

}  // namespace distclinr
