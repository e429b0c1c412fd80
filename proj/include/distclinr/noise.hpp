#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "distclinr/gate.hpp"
#include "distclinr/pauli.hpp"
#include "distclinr/rng.hpp"

namespace distclinr {

enum class NoiseModelKind { CircuitLevel, Uniform };

/// Channel classes with their own rate.
enum class NoiseChannel : std::uint8_t { OneQubit, TwoQubit, Remote, Idle, MeasFlip };
inline constexpr std::size_t kNumNoiseChannels = 5;

struct NoiseParams {
  double p = 0.0;
  NoiseModelKind model = NoiseModelKind::CircuitLevel;

  static NoiseParams circuit_level(double p) { return make(p, NoiseModelKind::CircuitLevel); }
  static NoiseParams uniform(double p) { return make(p, NoiseModelKind::Uniform); }
  static NoiseParams noiseless() { return make(0.0, NoiseModelKind::CircuitLevel); }

  bool uniform_model() const { return model == NoiseModelKind::Uniform; }
  double rate_1q() const { return uniform_model() ? p : p / 10.0; }
  double rate_2q() const { return p; }
  double rate_remote() const { return uniform_model() ? p : std::min(1.0, 3.0 * p); }
  double rate_idle() const { return uniform_model() ? 0.0 : p / 100.0; }
  double rate_meas_flip() const { return uniform_model() ? p : p / 10.0; }

  double rate(NoiseChannel c) const {
    switch (c) {
      case NoiseChannel::OneQubit: return rate_1q();
      case NoiseChannel::TwoQubit: return rate_2q();
      case NoiseChannel::Remote: return rate_remote();
      case NoiseChannel::Idle: return rate_idle();
      case NoiseChannel::MeasFlip: return rate_meas_flip();
    }
    return 0.0;
  }

 private:
  static NoiseParams make(double p, NoiseModelKind k) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("noise rate p must lie in [0, 1]");
    return NoiseParams{p, k};
  }
};

/// Channel that follows an op. Measurements carry no depolarizing channel
/// (only the outcome flip); preparation is followed by a 1-qubit channel.
constexpr NoiseChannel channel_for(GateKind k) {
  if (is_remote(k)) return NoiseChannel::Remote;
  if (is_two_qubit(k)) return NoiseChannel::TwoQubit;
  return NoiseChannel::OneQubit;
}

namespace detail {

// Index 1..3 -> X, Y, Z as (x, z) bits.
constexpr std::array<std::array<bool, 2>, 4> kPauliBits = {{{false, false}, {true, false}, {true, true}, {false, true}}};

}  // namespace detail

/// Depolarizing error after `op` on a register of `num_qubits` qubits.
/// Identity with probability 1 - rate, otherwise uniform over the 3 (or 15)
/// non-identity Paulis on the op's support.
inline PauliString sample_op_error(const GateOp& op, const NoiseParams& params, Rng& rng, std::size_t num_qubits) {
  PauliString e(num_qubits);
  if (is_measurement(op.kind)) return e;
  if (!bernoulli(rng, params.rate(channel_for(op.kind)))) return e;
  if (op.arity() == 2) {
    const auto code = 1 + uniform_below(rng, 15);
    const auto& a = detail::kPauliBits[code & 3U];
    const auto& b = detail::kPauliBits[code >> 2U];
    e.set(op.qubits[0], a[0], a[1]);
    e.set(op.qubits[1], b[0], b[1]);
  } else {
    const auto& a = detail::kPauliBits[1 + uniform_below(rng, 3)];
    e.set(op.qubits[0], a[0], a[1]);
  }
  return e;
}

inline std::vector<PauliString> sample_idle_errors(std::span<const std::uint32_t> idle_qubits, const NoiseParams& params,
                                                   Rng& rng, std::size_t num_qubits) {
  std::vector<PauliString> out;
  const double rate = params.rate_idle();
  if (rate <= 0.0) return out;
  for (auto q : idle_qubits) {
    if (!bernoulli(rng, rate)) continue;
    const auto& a = detail::kPauliBits[1 + uniform_below(rng, 3)];
    PauliString e(num_qubits);
    e.set(q, a[0], a[1]);
    out.push_back(std::move(e));
  }
  return out;
}

inline bool sample_meas_flip(const NoiseParams& params, Rng& rng) { return bernoulli(rng, params.rate_meas_flip()); }

/// Fast sampler used by the simulation engines.
///
/// Each channel keeps a countdown of Bernoulli failures until its next
/// success, drawn from the geometric distribution. Successive trials of one
/// channel are therefore i.i.d. Bernoulli(rate), but a trial costs a
/// decrement and a run of k trials costs O(1 + hits).
class NoiseSampler {
 public:
  NoiseSampler(const NoiseParams& params, std::uint64_t seed) : params_(params), rng_(seed) {
    for (std::size_t c = 0; c < kNumNoiseChannels; ++c) {
      const double r = params.rate(static_cast<NoiseChannel>(c));
      rate_[c] = r;
      if (r > 0.0 && r < 1.0) geo_[c] = std::geometric_distribution<std::uint64_t>(r);
      countdown_[c] = draw_gap(c);
    }
  }

  const NoiseParams& params() const { return params_; }
  Rng& rng() { return rng_; }

  /// One Bernoulli trial on channel c.
  bool hit(NoiseChannel c) {
    auto& cd = countdown_[idx(c)];
    if (cd > 0) {
      --cd;
      return false;
    }
    cd = draw_gap(idx(c));
    return true;
  }

  /// `trials` Bernoulli trials on channel c; calls f(i) for every success i.
  template <class F>
  void for_each_hit(NoiseChannel c, std::uint64_t trials, F&& f) {
    auto& cd = countdown_[idx(c)];
    std::uint64_t pos = 0;
    while (pos < trials) {
      if (cd >= trials - pos) {
        if (cd != kNever) cd -= trials - pos;
        return;
      }
      pos += cd;
      f(pos);
      ++pos;
      cd = draw_gap(idx(c));
    }
  }

  /// Uniform non-identity single-qubit Pauli as (x, z).
  std::array<bool, 2> pauli1() { return detail::kPauliBits[1 + uniform_below(rng_, 3)]; }
  /// Uniform non-identity two-qubit Pauli as ((xa, za), (xb, zb)).
  std::array<std::array<bool, 2>, 2> pauli2() {
    const auto code = 1 + uniform_below(rng_, 15);
    return {detail::kPauliBits[code & 3U], detail::kPauliBits[code >> 2U]};
  }

 private:
  static constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();
  static std::size_t idx(NoiseChannel c) { return static_cast<std::size_t>(c); }

  std::uint64_t draw_gap(std::size_t c) {
    if (rate_[c] <= 0.0) return kNever;
    if (rate_[c] >= 1.0) return 0;
    return geo_[c](rng_);
  }

  NoiseParams params_;
  Rng rng_;
  std::array<double, kNumNoiseChannels> rate_{};
  std::array<std::geometric_distribution<std::uint64_t>, kNumNoiseChannels> geo_{};
  std::array<std::uint64_t, kNumNoiseChannels> countdown_{};
};

}  // namespace distclinr
