#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace distclinr {

struct ArchConfig {
  std::size_t num_qpus = 2;
  std::size_t compute_qubits = 0;
  std::size_t storage_qubits = 0;
  std::size_t tau_e = 1;  // 0 means pairs are always stocked to capacity
  std::size_t links_per_connection = 1;
  std::size_t initial_inventory = 0;
  std::size_t layer_cap = 1'000'000;

  /// t+1 QPUs with 2n+1 compute and 2n storage qubits each.
  static ArchConfig for_clinr(std::size_t n, std::size_t t, std::size_t tau_e, std::size_t links = 1) {
    ArchConfig a;
    a.num_qpus = t + 1;
    a.compute_qubits = 2 * n + 1;
    a.storage_qubits = 2 * n;
    a.tau_e = tau_e;
    a.links_per_connection = links;
    return a;
  }

  /// Pairs one link can hold: storage is split evenly between the two links.
  std::size_t link_capacity() const { return storage_qubits / 2; }

  void validate() const {
    if (num_qpus < 2) throw std::invalid_argument("a ring needs at least two QPUs");
    if (links_per_connection < 1) throw std::invalid_argument("need at least one link per connection");
    if (initial_inventory > link_capacity()) throw std::invalid_argument("initial inventory exceeds storage");
    if (layer_cap < 1) throw std::invalid_argument("layer cap must be positive");
  }
};

/// Raised when a run exceeds ArchConfig::layer_cap.
class LayerCapExceeded : public std::runtime_error {
 public:
  explicit LayerCapExceeded(std::size_t cap)
      : std::runtime_error("schedule exceeded the layer cap of " + std::to_string(cap) + " layers") {}
};

struct LinkState {
  std::size_t available = 0;
  std::vector<std::size_t> timers;  // layers left until each generator delivers
  std::uint64_t generated = 0;      // includes pre-stocked pairs
  std::uint64_t consumed = 0;
  std::uint64_t discarded = 0;

  bool conserved() const { return generated == consumed + available + discarded; }
};

/// Bell pairs held on the ring links. Link k joins Q_k and Q_{k+1 mod T}.
class BellInventory {
 public:
  BellInventory(std::size_t num_links, std::size_t capacity, std::size_t tau_e, std::size_t generators,
                std::size_t initial = 0)
      : capacity_(capacity), tau_e_(tau_e), links_(num_links) {
    for (auto& l : links_) {
      l.timers.assign(generators, tau_e);
      l.available = std::min(initial, capacity);
      l.generated = l.available;
    }
    if (tau_e_ == 0) top_up();
  }

  static BellInventory for_arch(const ArchConfig& a) {
    return BellInventory(a.num_qpus, a.link_capacity(), a.tau_e, a.links_per_connection, a.initial_inventory);
  }

  std::size_t num_links() const { return links_.size(); }
  std::size_t capacity() const { return capacity_; }
  const LinkState& link(std::size_t k) const { return links_.at(k); }
  std::size_t available(std::size_t k) const { return links_.at(k).available; }

  bool try_consume(std::size_t k) {
    auto& l = links_.at(k);
    if (l.available == 0) return false;
    --l.available;
    ++l.consumed;
    return true;
  }

  /// Generators tick once per layer. A pair finished during layer L is usable
  /// from layer L+1; a pair arriving at a full link is discarded.
  void end_layer() {
    if (tau_e_ == 0) {
      top_up();
      return;
    }
    for (auto& l : links_) {
      for (auto& timer : l.timers) {
        if (--timer > 0) continue;
        timer = tau_e_;
        ++l.generated;
        if (l.available < capacity_) ++l.available;
        else ++l.discarded;
      }
    }
  }

  bool conserved() const {
    return std::all_of(links_.begin(), links_.end(), [](const LinkState& l) { return l.conserved(); });
  }

 private:
  void top_up() {
    for (auto& l : links_) {
      l.generated += capacity_ - l.available;
      l.available = capacity_;
    }
  }

  std::size_t capacity_;
  std::size_t tau_e_;
  std::vector<LinkState> links_;
};

enum class TransferKind { LocalInjection, RemoteInjection, Teleport };
enum class TransferStage { Op, Hadamard, Measure, Correct };

/// Per-qubit four-stage transfer of an n-qubit register: the two-qubit op
/// (which needs a Bell pair when remote), H on the source, the measurements,
/// and the frame correction. A qubit advances one stage per layer; qubits
/// that wait for pairs are served lowest index first.
class TransferPipeline {
 public:
  TransferPipeline(TransferKind kind, std::size_t block, std::size_t n, std::optional<std::size_t> link)
      : kind_(kind), block_(block), n_(n), link_(link) {
    if (kind != TransferKind::LocalInjection && !link) throw std::invalid_argument("remote transfer needs a link");
  }

  TransferKind kind() const { return kind_; }
  std::size_t block() const { return block_; }
  bool complete() const { return next_ == n_ && inflight_.empty(); }
  std::size_t pairs_consumed() const { return pairs_; }

  /// Runs one layer. `sink(kind, block, qubit, stage)` performs the work.
  /// Returns true when some qubit still waited for a pair in this layer.
  template <class Sink>
  bool step(BellInventory* inventory, Sink&& sink) {
    for (auto& g : inflight_) {
      const auto stage = static_cast<TransferStage>(g.done);
      for (std::size_t j = g.first; j < g.first + g.count; ++j) sink(kind_, block_, j, stage);
      ++g.done;
    }
    while (!inflight_.empty() && inflight_.front().done == 4) inflight_.pop_front();

    std::size_t grab = n_ - next_;
    if (kind_ != TransferKind::LocalInjection) {
      grab = std::min(grab, inventory->available(*link_));
      for (std::size_t i = 0; i < grab; ++i) inventory->try_consume(*link_);
      pairs_ += grab;
    }
    if (grab > 0) {
      for (std::size_t j = next_; j < next_ + grab; ++j) sink(kind_, block_, j, TransferStage::Op);
      inflight_.push_back({next_, grab, 1});
      next_ += grab;
    }
    return next_ < n_;
  }

 private:
  struct Group {
    std::size_t first, count, done;
  };

  TransferKind kind_;
  std::size_t block_;
  std::size_t n_;
  std::optional<std::size_t> link_;
  std::size_t next_ = 0;
  std::size_t pairs_ = 0;
  std::deque<Group> inflight_;
};

enum class QpuPhase { RspvRunning, RspvDone, Injecting, Consumed, Teleporting, Output };

inline const char* phase_name(QpuPhase p) {
  switch (p) {
    case QpuPhase::RspvRunning: return "rspv";
    case QpuPhase::RspvDone: return "ready";
    case QpuPhase::Injecting: return "injecting";
    case QpuPhase::Consumed: return "holds_data";
    case QpuPhase::Teleporting: return "teleporting";
    case QpuPhase::Output: return "output";
  }
  return "?";
}

/// Snapshot emitted once per global layer.
struct LayerRecord {
  std::size_t layer = 0;
  std::vector<LinkState> links;  // timers omitted
  std::vector<QpuPhase> phases;
  std::optional<TransferKind> transfer;
  std::size_t transfer_block = 0;
  bool stalled = false;
  std::size_t data_holder = 0;
};

using TraceSink = std::function<void(const LayerRecord&)>;

struct TransferRecord {
  std::size_t block = 0;  // 1..t for injections, t+1 for the final teleport
  std::size_t start_layer = 0;
  std::size_t end_layer = 0;  // last layer, inclusive
  std::size_t stalled_layers = 0;
  std::size_t pairs = 0;

  std::size_t depth() const { return end_layer - start_layer + 1; }
};

struct ScheduleResult {
  std::size_t total_depth = 0;
  std::vector<std::size_t> rspv_end;  // per block, first layer after RSP&V
  std::vector<TransferRecord> injections;
  std::optional<TransferRecord> teleport;
  std::uint64_t bell_pairs_consumed = 0;
  std::size_t conservation_violations = 0;
};

// A workload supplies the physical content of the schedule:
//   std::size_t num_blocks() const;  std::size_t num_qubits() const;
//   bool rspv_done(std::size_t k) const;    // k in 1..t
//   void rspv_layer(std::size_t k);
//   void transfer_begin(TransferKind, std::size_t block);
//   void transfer(TransferKind, std::size_t block, std::size_t qubit, TransferStage);
//   void begin_layer(std::size_t layer);  void end_layer(std::size_t layer);

/// Ring of t+1 QPUs: parallel RSP&V on Q_1..Q_t, serial injection into
/// Q_k once Q_k is verified and the previous injection is complete, then
/// teleportation of the output from Q_t to Q_0.
class RingScheduler {
 public:
  explicit RingScheduler(ArchConfig arch) : arch_(std::move(arch)) { arch_.validate(); }

  const ArchConfig& arch() const { return arch_; }

  template <class W>
  ScheduleResult run(W& w, const TraceSink& trace = {}) const {
    const std::size_t t = w.num_blocks(), n = w.num_qubits();
    if (arch_.num_qpus != t + 1)
      throw std::invalid_argument("ring has " + std::to_string(arch_.num_qpus) + " QPUs but t+1 = " +
                                  std::to_string(t + 1));
    if (arch_.link_capacity() < 1 && n > 0) throw std::invalid_argument("no storage for Bell pairs");

    BellInventory inv = BellInventory::for_arch(arch_);
    ScheduleResult res;
    res.rspv_end.assign(t + 1, 0);
    std::vector<QpuPhase> phase(t + 1, QpuPhase::RspvRunning);
    phase[0] = QpuPhase::Consumed;
    for (std::size_t k = 1; k <= t; ++k)
      if (w.rspv_done(k)) phase[k] = QpuPhase::RspvDone;

    std::optional<TransferPipeline> active;
    TransferRecord record;
    std::size_t next = 1, holder = 0;
    bool finished = false;
    auto sink = [&](TransferKind kind, std::size_t block, std::size_t j, TransferStage s) {
      w.transfer(kind, block, j, s);
    };

    for (std::size_t layer = 0; !finished; ++layer) {
      if (layer >= arch_.layer_cap) throw LayerCapExceeded(arch_.layer_cap);
      w.begin_layer(layer);

      if (!active) {
        if (next <= t && phase[next] == QpuPhase::RspvDone) {
          active.emplace(TransferKind::RemoteInjection, next, n, next - 1);
          w.transfer_begin(TransferKind::RemoteInjection, next);
          phase[next] = QpuPhase::Injecting;
          record = {next, layer, layer, 0, 0};
        } else if (next > t) {
          active.emplace(TransferKind::Teleport, t + 1, n, t);
          w.transfer_begin(TransferKind::Teleport, t + 1);
          phase[t] = QpuPhase::Teleporting;
          record = {t + 1, layer, layer, 0, 0};
        }
      }

      for (std::size_t k = 1; k <= t; ++k) {
        if (phase[k] != QpuPhase::RspvRunning) continue;
        w.rspv_layer(k);
        if (w.rspv_done(k)) {
          phase[k] = QpuPhase::RspvDone;
          res.rspv_end[k] = layer + 1;
        }
      }

      bool stalled = false;
      std::optional<TransferKind> kind;
      std::size_t kind_block = 0;
      if (active) {
        kind = active->kind();
        kind_block = active->block();
        stalled = active->step(&inv, sink);
        if (stalled) ++record.stalled_layers;
        if (active->complete()) {
          record.end_layer = layer;
          record.pairs = active->pairs_consumed();
          res.bell_pairs_consumed += record.pairs;
          if (active->kind() == TransferKind::Teleport) {
            res.teleport = record;
            phase[t] = QpuPhase::Consumed;
            phase[0] = QpuPhase::Output;
            holder = 0;
            finished = true;
          } else {
            res.injections.push_back(record);
            phase[next] = QpuPhase::Consumed;
            holder = next;
            ++next;
          }
          active.reset();
        }
      }

      inv.end_layer();
      if (!inv.conserved()) ++res.conservation_violations;
      w.end_layer(layer);
      if (trace) emit(trace, layer, inv, phase, kind, kind_block, stalled, holder);
      res.total_depth = layer + 1;
    }
    return res;
  }

 private:
  static void emit(const TraceSink& trace, std::size_t layer, const BellInventory& inv,
                   const std::vector<QpuPhase>& phase, std::optional<TransferKind> kind, std::size_t block,
                   bool stalled, std::size_t holder) {
    LayerRecord rec;
    rec.layer = layer;
    for (std::size_t k = 0; k < inv.num_links(); ++k) {
      auto l = inv.link(k);
      l.timers.clear();
      rec.links.push_back(std::move(l));
    }
    rec.phases = phase;
    rec.transfer = kind;
    rec.transfer_block = block;
    rec.stalled = stalled;
    rec.data_holder = holder;
    trace(rec);
  }

  ArchConfig arch_;
};

/// Single QPU: for each block, RSP&V until accepted, then a local injection.
class MonolithicScheduler {
 public:
  explicit MonolithicScheduler(std::size_t layer_cap = 1'000'000) : cap_(layer_cap) {}

  template <class W>
  ScheduleResult run(W& w) const {
    const std::size_t t = w.num_blocks(), n = w.num_qubits();
    ScheduleResult res;
    res.rspv_end.assign(t + 1, 0);
    std::size_t layer = 0;
    auto tick = [&](auto&& body) {
      if (layer >= cap_) throw LayerCapExceeded(cap_);
      w.begin_layer(layer);
      body();
      w.end_layer(layer);
      ++layer;
    };
    auto sink = [&](TransferKind kind, std::size_t block, std::size_t j, TransferStage s) {
      w.transfer(kind, block, j, s);
    };
    for (std::size_t k = 1; k <= t; ++k) {
      while (!w.rspv_done(k)) tick([&] { w.rspv_layer(k); });
      res.rspv_end[k] = layer;
      TransferPipeline pipe(TransferKind::LocalInjection, k, n, std::nullopt);
      TransferRecord rec{k, layer, layer, 0, 0};
      w.transfer_begin(TransferKind::LocalInjection, k);
      while (!pipe.complete()) tick([&] { pipe.step(nullptr, sink); });
      rec.end_layer = layer - 1;
      res.injections.push_back(rec);
    }
    res.total_depth = layer;
    return res;
  }

 private:
  std::size_t cap_;
};

}  // namespace distclinr
