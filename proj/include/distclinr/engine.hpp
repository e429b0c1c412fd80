#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "distclinr/arch.hpp"
#include "distclinr/circuit.hpp"
#include "distclinr/clinr.hpp"
#include "distclinr/noise.hpp"
#include "distclinr/rng.hpp"
#include "distclinr/tableau.hpp"

namespace distclinr {

enum class EngineKind { PauliFrame, ReferenceTableau };
enum class Mode { Direct, Monolithic, Distributed };

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Direct: return "direct";
    case Mode::Monolithic: return "mono_clinr";
    case Mode::Distributed: return "dist_clinr";
  }
  return "?";
}

struct EngineOptions {
  EngineKind engine = EngineKind::PauliFrame;
  /// Extra restart probability applied after an otherwise accepted RSP&V
  /// round, drawn from the block's own stream. Used to force restarts.
  double forced_restart_prob = 0.0;
  std::size_t layer_cap = 1'000'000;
  /// Keep the output state in the ShotResult. The frame engine has no
  /// state of its own and stores the ideal output.
  bool keep_output_state = false;
};

struct ShotResult {
  bool failed = false;
  std::size_t total_depth = 0;
  std::vector<std::size_t> restarts_per_block;
  std::vector<std::size_t> rspv_layers_per_block;  // over all attempts
  std::uint64_t bell_pairs_consumed = 0;
  std::vector<TransferRecord> transfers;  // injections, then the teleport if any
  std::size_t conservation_violations = 0;
  std::optional<StabilizerTableau> output_state;
};

/// Per-circuit data shared by every shot and mode.
struct PreparedCircuit {
  Circuit circuit;
  LayeredCircuit layers;
  std::size_t t = 1;
  std::vector<ResourceBlock> blocks;
  StabilizerTableau ideal;  // C|0...0>

  std::size_t num_qubits() const { return circuit.num_qubits(); }
};

/// Splits C into t equal-depth blocks and precomputes resource data. The
/// seed only picks the representative RSV draw recorded in each block.
inline PreparedCircuit prepare(const Circuit& c, std::size_t t, std::size_t r, std::uint64_t seed) {
  PreparedCircuit pc;
  pc.circuit = c;
  pc.layers = layer(c);
  pc.t = t;
  pc.ideal = ideal_output(c);
  Rng rng(seed);
  for (const auto& sub : split_equal_depth(c, t)) pc.blocks.push_back(build_resource_block(sub, r, rng));
  return pc;
}

/// Failure iff the residual error anticommutes with some stabilizer of the
/// ideal output, i.e. it changes the state rather than a global phase.
inline bool is_logical_failure(const PauliString& residual, const StabilizerTableau& ideal) {
  for (const auto& s : ideal.stabilizers())
    if (!residual.commutes(s)) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Backends

/// Tracks only the accumulated Pauli error. Measurement results are
/// deviations from the noise-free outcome.
class FrameBackend {
 public:
  static constexpr bool kTracksSigns = false;

  FrameBackend(std::size_t num_qubits, std::uint64_t) : frame_(num_qubits) {}

  void gate(const GateOp& op) { conjugate_in_place(op, frame_); }
  void prep(std::uint32_t q) { frame_.set(q, false, false); }
  bool measure_z(std::uint32_t q) { return frame_.x(q); }
  void error(std::uint32_t q, bool x, bool z) { frame_.set(q, frame_.x(q) != x, frame_.z(q) != z); }

  const PauliString& frame() const { return frame_; }

  bool failed(std::span<const std::uint32_t> out, const StabilizerTableau& ideal) const {
    return is_logical_failure(frame_.gather(out), ideal);
  }
  StabilizerTableau output_state(std::span<const std::uint32_t>, const StabilizerTableau& ideal) const {
    return ideal;
  }

 private:
  PauliString frame_;
};

/// Full noisy stabilizer state; measurements are sampled.
class TableauBackend {
 public:
  static constexpr bool kTracksSigns = true;

  TableauBackend(std::size_t num_qubits, std::uint64_t measure_seed) : state_(num_qubits), rng_(measure_seed) {}

  void gate(const GateOp& op) { state_.apply(op); }
  void prep(std::uint32_t q) { state_.reset(q, &rng_); }
  bool measure_z(std::uint32_t q) { return state_.measure_z(q, rng_).outcome < 0; }
  void error(std::uint32_t q, bool x, bool z) {
    PauliString e(state_.num_qubits());
    e.set(q, x, z);
    state_.apply_pauli(e);
  }

  const StabilizerTableau& state() const { return state_; }

  bool failed(std::span<const std::uint32_t> out, const StabilizerTableau& ideal) const {
    return !reduced_state(state_, out).same_state(ideal);
  }
  StabilizerTableau output_state(std::span<const std::uint32_t> out, const StabilizerTableau&) const {
    return reduced_state(state_, out);
  }

 private:
  StabilizerTableau state_;
  Rng rng_;
};

// ---------------------------------------------------------------------------
// Noisy executor

/// Applies ops with their noise channels and charges idle noise at the end
/// of each layer. Every qubit belongs to one noise stream; stream 0 is the
/// shared one and stream k >= 1 belongs to block k while its RSP&V runs, so
/// that the RSP&V randomness of a block does not depend on the mode.
template <class Backend>
class NoisyExecutor {
 public:
  NoisyExecutor(std::size_t num_qubits, const NoiseParams& noise, std::size_t num_streams, std::uint64_t seed)
      : backend_(num_qubits, derive_seed(seed, 0xBAC0ULL)),
        live_(num_qubits, false),
        owner_(num_qubits, 0),
        stamp_(num_qubits, 0),
        live_count_(num_streams, 0),
        touched_live_(num_streams, 0),
        members_(num_streams) {
    for (std::size_t s = 0; s < num_streams; ++s) streams_.emplace_back(noise, derive_seed(seed, s));
  }

  Backend& backend() { return backend_; }
  NoiseSampler& stream(std::size_t s) { return streams_[s]; }
  std::size_t num_qubits() const { return live_.size(); }
  bool live(std::uint32_t q) const { return live_[q]; }

  void set_live(std::uint32_t q, bool on) {
    if (live_[q] == on) return;
    live_[q] = on;
    if (on) ++live_count_[owner_[q]];
    else --live_count_[owner_[q]];
  }

  /// Hands the listed qubits (in this order) to stream s for idle noise.
  void assign(std::span<const std::uint32_t> qubits, std::size_t s) {
    for (auto q : qubits) {
      const auto old = owner_[q];
      if (live_[q]) {
        --live_count_[old];
        ++live_count_[s];
      }
      owner_[q] = static_cast<std::uint32_t>(s);
    }
    if (s != 0) members_[s].assign(qubits.begin(), qubits.end());
  }
  void release(std::size_t s) {
    for (auto q : members_[s]) {
      if (owner_[q] != s) continue;
      if (live_[q]) {
        --live_count_[s];
        ++live_count_[0];
      }
      owner_[q] = 0;
    }
    members_[s].clear();
  }

  void begin_layer() {
    ++layer_;
    touched_.clear();
  }

  void apply(const GateOp& op, std::size_t s) {
    auto& ns = streams_[s];
    touch(op.qubits[0]);
    if (op.kind == GateKind::PrepZ) {
      backend_.prep(op.qubits[0]);
      set_live(op.qubits[0], true);
    } else {
      backend_.gate(op);
    }
    if (op.arity() == 2) {
      touch(op.qubits[1]);
      if (ns.hit(channel_for(op.kind))) {
        const auto e = ns.pauli2();
        backend_.error(op.qubits[0], e[0][0], e[0][1]);
        backend_.error(op.qubits[1], e[1][0], e[1][1]);
      }
    } else if (ns.hit(NoiseChannel::OneQubit)) {
      const auto e = ns.pauli1();
      backend_.error(op.qubits[0], e[0], e[1]);
    }
  }

  /// Z measurement; the result includes the classical flip channel.
  bool measure(std::uint32_t q, std::size_t s) {
    touch(q);
    const bool bit = backend_.measure_z(q) != streams_[s].hit(NoiseChannel::MeasFlip);
    set_live(q, false);
    return bit;
  }

  bool flip(std::size_t s) { return streams_[s].hit(NoiseChannel::MeasFlip); }

  void error(std::uint32_t q, bool x, bool z) { backend_.error(q, x, z); }

  /// Idle channel on every live qubit that no op touched in this layer.
  void end_layer() {
    std::fill(touched_live_.begin(), touched_live_.end(), 0);
    for (auto q : touched_)
      if (live_[q]) ++touched_live_[owner_[q]];
    for (std::size_t s = 0; s < streams_.size(); ++s) {
      const std::uint64_t idle = live_count_[s] - touched_live_[s];
      if (idle == 0) continue;
      streams_[s].for_each_hit(NoiseChannel::Idle, idle, [&](std::uint64_t i) {
        const auto q = nth_idle(s, i);
        const auto e = streams_[s].pauli1();
        backend_.error(q, e[0], e[1]);
      });
    }
  }

 private:
  void touch(std::uint32_t q) {
    if (stamp_[q] == layer_) return;
    stamp_[q] = layer_;
    touched_.push_back(q);
  }

  bool idle_candidate(std::uint32_t q, std::size_t s) const {
    return owner_[q] == s && live_[q] && stamp_[q] != layer_;
  }

  std::uint32_t nth_idle(std::size_t s, std::uint64_t i) const {
    if (s == 0) {
      for (std::uint32_t q = 0; q < live_.size(); ++q)
        if (idle_candidate(q, 0) && i-- == 0) return q;
    } else {
      for (auto q : members_[s])
        if (idle_candidate(q, s) && i-- == 0) return q;
    }
    throw std::logic_error("idle qubit index out of range");
  }

  Backend backend_;
  std::vector<NoiseSampler> streams_;
  std::vector<bool> live_;
  std::vector<std::uint32_t> owner_;
  std::vector<std::uint64_t> stamp_;
  std::vector<std::uint32_t> touched_;
  std::uint64_t layer_ = 0;
  std::vector<std::uint64_t> live_count_;
  std::vector<std::uint64_t> touched_live_;
  std::vector<std::vector<std::uint32_t>> members_;
};

// ---------------------------------------------------------------------------
// Register layouts

struct BlockPlacement {
  std::uint32_t a = 0;     // first resource half
  std::uint32_t b = 0;     // second half, holds the data after injection
  std::uint32_t anc = 0;   // verification ancilla
  std::uint32_t data = 0;  // data register consumed by the injection
  QpuId data_qpu = kMonolithic;
  QpuId qpu = kMonolithic;
};

struct Layout {
  std::size_t num_qubits = 0;
  std::vector<BlockPlacement> blocks;  // index k-1 for block k
  std::uint32_t output = 0;            // base of the final output register
  bool teleport = false;
};

/// 3n+1 qubits: three n-qubit groups that rotate between data, first and
/// second resource half, plus one ancilla.
inline Layout monolithic_layout(std::size_t n, std::size_t t) {
  Layout l;
  l.num_qubits = 3 * n + 1;
  std::uint32_t data = 0;
  for (std::size_t k = 0; k < t; ++k) {
    const auto g = static_cast<std::uint32_t>(data / n);
    BlockPlacement p;
    p.data = data;
    p.a = static_cast<std::uint32_t>(((g + 1) % 3) * n);
    p.b = static_cast<std::uint32_t>(((g + 2) % 3) * n);
    p.anc = static_cast<std::uint32_t>(3 * n);
    l.blocks.push_back(p);
    data = p.b;
  }
  l.output = data;
  return l;
}

/// t+1 QPUs of 2n+1 compute qubits. Q_0 starts with the data in its first
/// n qubits and receives the output there.
inline Layout distributed_layout(std::size_t n, std::size_t t) {
  Layout l;
  const auto stride = static_cast<std::uint32_t>(2 * n + 1);
  l.num_qubits = (t + 1) * stride;
  std::uint32_t data = 0;
  QpuId data_qpu = 0;
  for (std::size_t k = 1; k <= t; ++k) {
    BlockPlacement p;
    p.qpu = static_cast<QpuId>(k);
    p.a = static_cast<std::uint32_t>(k) * stride;
    p.b = p.a + static_cast<std::uint32_t>(n);
    p.anc = p.a + static_cast<std::uint32_t>(2 * n);
    p.data = data;
    p.data_qpu = data_qpu;
    l.blocks.push_back(p);
    data = p.b;
    data_qpu = p.qpu;
  }
  l.output = 0;
  l.teleport = true;
  return l;
}

// ---------------------------------------------------------------------------
// CliNR workload driven by the schedulers

template <class Backend>
class ClinrWorkload {
 public:
  ClinrWorkload(const PreparedCircuit& pc, const ClinrConfig& cfg, Layout layout, const NoiseParams& noise,
                std::uint64_t seed, const EngineOptions& opts)
      : pc_(pc),
        cfg_(cfg),
        layout_(std::move(layout)),
        opts_(opts),
        n_(pc.num_qubits()),
        ex_(layout_.num_qubits, noise, pc.t + 1, seed),
        blocks_(pc.t) {
    cfg_.validate();
    if (pc.blocks.size() != cfg_.t) throw std::invalid_argument("prepared circuit has a different block count");
    for (std::size_t k = 1; k <= pc.t; ++k) {
      auto& st = blocks_[k - 1];
      const auto& pl = layout_.blocks[k - 1];
      for (std::uint32_t j = 0; j < n_; ++j) st.region.push_back(pl.a + j);
      for (std::uint32_t j = 0; j < n_; ++j) st.region.push_back(pl.b + j);
      st.region.push_back(pl.anc);
      st.data_bits.assign(n_, false);
      st.res_bits.assign(n_, false);
    }
  }

  std::size_t num_blocks() const { return pc_.t; }
  std::size_t num_qubits() const { return n_; }
  NoisyExecutor<Backend>& executor() { return ex_; }

  bool rspv_done(std::size_t k) const { return blocks_[k - 1].done; }

  void rspv_layer(std::size_t k) {
    auto& st = blocks_[k - 1];
    const auto& blk = pc_.blocks[k - 1];
    const auto& pl = layout_.blocks[k - 1];
    const std::size_t s = k;
    if (!st.started) {
      st.started = true;
      ex_.assign(st.region, s);
    }
    if (st.step == 0 && st.meas == 0 && !st.in_rsv) begin_attempt(st, blk, s);
    ++st.layers;

    if (!st.in_rsv) {
      for (const auto& op : blk.rsp_layers.layers[st.step]) ex_.apply(place(op, pl), s);
      if (++st.step == blk.rsp_layers.depth()) {
        st.step = 0;
        st.in_rsv = true;
        if (st.obs.empty()) finish_round(st, k);
      }
      return;
    }

    const auto& m = st.obs[st.meas];
    const std::size_t w = m.support.size();
    if (st.step == 0) {
      ex_.apply(GateOp::one(GateKind::PrepZ, pl.anc), s);
    } else if (st.step == 1 || st.step == w + 2) {
      ex_.apply(GateOp::one(GateKind::H, pl.anc), s);
    } else if (st.step < w + 2) {
      const auto& [q, kind] = m.support[st.step - 2];
      ex_.apply(GateOp::two(kind, pl.anc, local_to_phys(q, pl)), s);
    } else {
      bool bit = ex_.measure(pl.anc, s);
      if constexpr (Backend::kTracksSigns) bit = bit != m.expected;
      st.nontrivial.push_back(bit);
      st.step = 0;
      ++st.meas;
      if (bit && cfg_.restart_policy == RestartPolicy::Immediate) {
        restart(st);
        return;
      }
      if (st.meas == st.obs.size()) finish_round(st, k);
      return;
    }
    ++st.step;
  }

  void transfer_begin(TransferKind kind, std::size_t k) {
    // The |0...0> input is prepared when the first injection needs it.
    if (k == 1 && kind != TransferKind::Teleport)
      for (std::uint32_t j = 0; j < n_; ++j) ex_.set_live(layout_.blocks[0].data + j, true);
  }

  void transfer(TransferKind kind, std::size_t k, std::size_t j, TransferStage stage) {
    const auto jj = static_cast<std::uint32_t>(j);
    if (kind == TransferKind::Teleport) {
      const std::uint32_t src = layout_.blocks.back().b + jj, dst = layout_.output + jj;
      switch (stage) {
        case TransferStage::Op:
          ex_.apply(GateOp::remote(GateKind::TeleportQubit, src, static_cast<QpuId>(pc_.t), dst, 0), 0);
          ex_.set_live(dst, true);
          // Bell-measurement bits of the teleport, each subject to a flip.
          ex_.error(dst, ex_.flip(0), ex_.flip(0));
          break;
        case TransferStage::Hadamard: ex_.apply(GateOp::one(GateKind::H, src), 0); break;
        case TransferStage::Measure: ex_.measure(src, 0); break;
        case TransferStage::Correct: break;
      }
      return;
    }
    auto& st = blocks_[k - 1];
    const auto& pl = layout_.blocks[k - 1];
    const std::uint32_t d = pl.data + jj, a = pl.a + jj;
    switch (stage) {
      case TransferStage::Op:
        if (kind == TransferKind::RemoteInjection) {
          ex_.apply(GateOp::remote(GateKind::RemoteCX, d, pl.data_qpu, a, pl.qpu), 0);
          // Classical bits of the gate teleportation: an X flip lands on the
          // target, a Z flip on the control.
          ex_.error(a, ex_.flip(0), false);
          ex_.error(d, false, ex_.flip(0));
        } else {
          ex_.apply(GateOp::two(GateKind::CX, d, a), 0);
        }
        break;
      case TransferStage::Hadamard: ex_.apply(GateOp::one(GateKind::H, d), 0); break;
      case TransferStage::Measure:
        st.data_bits[j] = ex_.measure(d, 0);
        st.res_bits[j] = ex_.measure(a, 0);
        break;
      case TransferStage::Correct: {
        const auto& im = pc_.blocks[k - 1].images;
        if (st.res_bits[j]) apply_local(im.x[j], pl.b);
        if (st.data_bits[j]) apply_local(im.z[j], pl.b);
        break;
      }
    }
  }

  void begin_layer(std::size_t) { ex_.begin_layer(); }
  void end_layer(std::size_t) { ex_.end_layer(); }

  std::vector<std::uint32_t> output_qubits() const {
    std::vector<std::uint32_t> out(n_);
    const std::uint32_t base = layout_.teleport ? layout_.output : layout_.blocks.back().b;
    for (std::uint32_t j = 0; j < n_; ++j) out[j] = base + j;
    return out;
  }

  std::size_t restarts(std::size_t k) const { return blocks_[k - 1].restarts; }
  std::size_t rspv_layers(std::size_t k) const { return blocks_[k - 1].layers; }

 private:
  struct DrawnMeasurement {
    std::vector<std::pair<std::uint32_t, GateKind>> support;  // local qubit, controlled gate
    bool expected = false;
  };

  struct BlockState {
    std::vector<std::uint32_t> region;
    bool started = false;
    bool done = false;
    bool in_rsv = false;
    std::size_t step = 0;
    std::size_t meas = 0;
    std::vector<DrawnMeasurement> obs;
    std::vector<bool> nontrivial;
    std::size_t restarts = 0;
    std::size_t layers = 0;
    std::vector<bool> data_bits, res_bits;
  };

  void begin_attempt(BlockState& st, const ResourceBlock& blk, std::size_t s) {
    st.obs.clear();
    st.nontrivial.clear();
    auto& rng = ex_.stream(s).rng();
    for (std::size_t i = 0; i < cfg_.r; ++i) {
      const auto p = random_stabilizer(blk.resource, rng);
      DrawnMeasurement m;
      m.expected = p.negative();
      for (std::uint32_t q = 0; q < p.num_qubits(); ++q) {
        const char l = p.at(q);
        if (l == 'X') m.support.emplace_back(q, GateKind::CX);
        else if (l == 'Y') m.support.emplace_back(q, GateKind::CY);
        else if (l == 'Z') m.support.emplace_back(q, GateKind::CZ);
      }
      st.obs.push_back(std::move(m));
    }
  }

  void finish_round(BlockState& st, std::size_t k) {
    const std::unique_ptr<bool[]> flags(new bool[st.nontrivial.size() + 1]);
    for (std::size_t i = 0; i < st.nontrivial.size(); ++i) flags[i] = st.nontrivial[i];
    const auto d = restart_semantics(cfg_.restart_policy, std::span<const bool>(flags.get(), st.nontrivial.size()));
    bool restart_now = d.verdict == RsvVerdict::Restart;
    if (!restart_now && opts_.forced_restart_prob > 0.0)
      restart_now = bernoulli(ex_.stream(k).rng(), opts_.forced_restart_prob);
    if (restart_now) {
      restart(st);
      return;
    }
    st.done = true;
    ex_.release(k);
  }

  void restart(BlockState& st) {
    ++st.restarts;
    st.in_rsv = false;
    st.step = 0;
    st.meas = 0;
  }

  std::uint32_t local_to_phys(std::uint32_t q, const BlockPlacement& pl) const {
    return q < n_ ? pl.a + q : pl.b + (q - static_cast<std::uint32_t>(n_));
  }

  GateOp place(GateOp op, const BlockPlacement& pl) const {
    op.qubits[0] = local_to_phys(op.qubits[0], pl);
    if (op.arity() == 2) op.qubits[1] = local_to_phys(op.qubits[1], pl);
    return op;
  }

  void apply_local(const PauliString& p, std::uint32_t base) {
    for (std::uint32_t q = 0; q < p.num_qubits(); ++q)
      if (p.x(q) || p.z(q)) ex_.error(base + q, p.x(q), p.z(q));
  }

  const PreparedCircuit& pc_;
  ClinrConfig cfg_;
  Layout layout_;
  EngineOptions opts_;
  std::size_t n_;
  NoisyExecutor<Backend> ex_;
  std::vector<BlockState> blocks_;
};

// ---------------------------------------------------------------------------
// Runs

namespace detail {

template <class Backend>
void finish_shot(ShotResult& res, const Backend& be, std::span<const std::uint32_t> out, const PreparedCircuit& pc,
                 const EngineOptions& opts) {
  res.failed = be.failed(out, pc.ideal);
  if (opts.keep_output_state) res.output_state = be.output_state(out, pc.ideal);
}

template <class Backend>
ShotResult run_direct_with(const PreparedCircuit& pc, const NoiseParams& noise, std::uint64_t seed,
                           const EngineOptions& opts) {
  const std::size_t n = pc.num_qubits();
  NoisyExecutor<Backend> ex(n, noise, 1, seed);
  std::vector<std::uint32_t> out(n);
  for (std::uint32_t q = 0; q < n; ++q) {
    out[q] = q;
    ex.set_live(q, true);
  }
  for (const auto& lay : pc.layers.layers) {
    ex.begin_layer();
    for (const auto& op : lay) ex.apply(op, 0);
    ex.end_layer();
  }
  ShotResult res;
  res.total_depth = pc.layers.depth();
  finish_shot(res, ex.backend(), out, pc, opts);
  return res;
}

template <class Backend>
ShotResult collect(ClinrWorkload<Backend>& w, const ScheduleResult& sched, const PreparedCircuit& pc,
                   const EngineOptions& opts) {
  ShotResult res;
  res.total_depth = sched.total_depth;
  res.bell_pairs_consumed = sched.bell_pairs_consumed;
  res.transfers = sched.injections;
  if (sched.teleport) res.transfers.push_back(*sched.teleport);
  res.conservation_violations = sched.conservation_violations;
  for (std::size_t k = 1; k <= pc.t; ++k) {
    res.restarts_per_block.push_back(w.restarts(k));
    res.rspv_layers_per_block.push_back(w.rspv_layers(k));
  }
  const auto out = w.output_qubits();
  finish_shot(res, w.executor().backend(), out, pc, opts);
  return res;
}

template <class Backend>
ShotResult run_monolithic_with(const PreparedCircuit& pc, const ClinrConfig& cfg, const NoiseParams& noise,
                               std::uint64_t seed, const EngineOptions& opts) {
  ClinrWorkload<Backend> w(pc, cfg, monolithic_layout(pc.num_qubits(), pc.t), noise, seed, opts);
  const auto sched = MonolithicScheduler(opts.layer_cap).run(w);
  return collect(w, sched, pc, opts);
}

template <class Backend>
ShotResult run_distributed_with(const PreparedCircuit& pc, const ClinrConfig& cfg, const ArchConfig& arch,
                                const NoiseParams& noise, std::uint64_t seed, const EngineOptions& opts,
                                const TraceSink& trace) {
  const std::size_t n = pc.num_qubits();
  if (arch.num_qpus != cfg.t + 1) throw std::invalid_argument("distributed CliNR needs t+1 QPUs");
  if (arch.compute_qubits < 2 * n + 1) throw std::invalid_argument("each QPU needs 2n+1 compute qubits");
  if (arch.link_capacity() < 1) throw std::invalid_argument("each QPU needs storage for Bell pairs");
  ClinrWorkload<Backend> w(pc, cfg, distributed_layout(n, pc.t), noise, seed, opts);
  auto a = arch;
  a.layer_cap = std::min(a.layer_cap, opts.layer_cap);
  const auto sched = RingScheduler(a).run(w, trace);
  return collect(w, sched, pc, opts);
}

}  // namespace detail

inline ShotResult run_direct(const PreparedCircuit& pc, const NoiseParams& noise, std::uint64_t seed,
                             const EngineOptions& opts = {}) {
  if (opts.engine == EngineKind::ReferenceTableau) return detail::run_direct_with<TableauBackend>(pc, noise, seed, opts);
  return detail::run_direct_with<FrameBackend>(pc, noise, seed, opts);
}

inline ShotResult run_monolithic_clinr(const PreparedCircuit& pc, const ClinrConfig& cfg, const NoiseParams& noise,
                                       std::uint64_t seed, const EngineOptions& opts = {}) {
  if (opts.engine == EngineKind::ReferenceTableau)
    return detail::run_monolithic_with<TableauBackend>(pc, cfg, noise, seed, opts);
  return detail::run_monolithic_with<FrameBackend>(pc, cfg, noise, seed, opts);
}

inline ShotResult run_distributed_clinr(const PreparedCircuit& pc, const ClinrConfig& cfg, const ArchConfig& arch,
                                        const NoiseParams& noise, std::uint64_t seed, const EngineOptions& opts = {},
                                        const TraceSink& trace = {}) {
  if (opts.engine == EngineKind::ReferenceTableau)
    return detail::run_distributed_with<TableauBackend>(pc, cfg, arch, noise, seed, opts, trace);
  return detail::run_distributed_with<FrameBackend>(pc, cfg, arch, noise, seed, opts, trace);
}

// ---------------------------------------------------------------------------
// Estimation

struct CircuitStats {
  std::size_t shots = 0;
  std::size_t failures = 0;
  double depth_sum = 0.0;
  std::uint64_t restarts = 0;     // summed over blocks and shots
  std::uint64_t attempts = 0;     // RSP&V attempts, summed
  std::uint64_t rspv_layers = 0;  // summed over blocks and shots

  double ler() const { return shots ? double(failures) / double(shots) : 0.0; }
  double mean_depth() const { return shots ? depth_sum / double(shots) : 0.0; }
  /// Fraction of RSP&V attempts that were rejected.
  double restart_rate() const { return attempts ? double(restarts) / double(attempts) : 0.0; }
  /// Mean RSP&V depth of one attempt.
  double attempt_depth() const { return attempts ? double(rspv_layers) / double(attempts) : 0.0; }

  void add(const ShotResult& s) {
    ++shots;
    failures += s.failed;
    depth_sum += double(s.total_depth);
    for (std::size_t k = 0; k < s.restarts_per_block.size(); ++k) {
      restarts += s.restarts_per_block[k];
      attempts += s.restarts_per_block[k] + 1;
      rspv_layers += s.rspv_layers_per_block[k];
    }
  }
};

struct SweepStats {
  std::vector<CircuitStats> circuits;
  double ler_mean = 0, ler_std = 0, depth_mean = 0, depth_std = 0;
};

/// Mean and sample standard deviation.
inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double m = 0;
  for (double x : xs) m += x;
  m /= double(xs.size());
  if (xs.size() < 2) return {m, 0.0};
  double v = 0;
  for (double x : xs) v += (x - m) * (x - m);
  return {m, std::sqrt(v / double(xs.size() - 1))};
}

/// Aggregates per-circuit results: std is taken over circuit means.
inline SweepStats aggregate(std::vector<CircuitStats> circuits) {
  SweepStats s;
  std::vector<double> ler, depth;
  for (const auto& c : circuits) {
    ler.push_back(c.ler());
    depth.push_back(c.mean_depth());
  }
  std::tie(s.ler_mean, s.ler_std) = mean_std(ler);
  std::tie(s.depth_mean, s.depth_std) = mean_std(depth);
  s.circuits = std::move(circuits);
  return s;
}

struct ModeSpec {
  Mode mode = Mode::Direct;
  ClinrConfig clinr;
  ArchConfig arch;
};

inline ShotResult run_shot(const PreparedCircuit& pc, const ModeSpec& spec, const NoiseParams& noise,
                           std::uint64_t seed, const EngineOptions& opts = {}) {
  switch (spec.mode) {
    case Mode::Direct: return run_direct(pc, noise, seed, opts);
    case Mode::Monolithic: return run_monolithic_clinr(pc, spec.clinr, noise, seed, opts);
    case Mode::Distributed: return run_distributed_clinr(pc, spec.clinr, spec.arch, noise, seed, opts);
  }
  throw std::invalid_argument("unknown mode");
}

/// Runs `shots` shots on each prepared circuit. Shot seeds derive from the
/// circuit seeds, so results are independent of evaluation order.
inline SweepStats estimate(const std::vector<PreparedCircuit>& circuits, const std::vector<std::uint64_t>& seeds,
                           std::size_t shots, const ModeSpec& spec, const NoiseParams& noise,
                           const EngineOptions& opts = {}) {
  if (shots < 1) throw std::invalid_argument("need at least one shot per circuit");
  if (seeds.size() != circuits.size()) throw std::invalid_argument("one seed per circuit required");
  std::vector<CircuitStats> per;
  for (std::size_t c = 0; c < circuits.size(); ++c) {
    CircuitStats cs;
    for (std::size_t s = 0; s < shots; ++s) cs.add(run_shot(circuits[c], spec, noise, derive_seed(seeds[c], s), opts));
    per.push_back(cs);
  }
  return aggregate(std::move(per));
}

}  // namespace distclinr
