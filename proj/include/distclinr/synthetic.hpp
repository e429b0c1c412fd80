#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "distclinr/arch.hpp"
#include "distclinr/rng.hpp"

namespace distclinr {

/// Workload without quantum content: block k's RSP&V takes delta[k] layers
/// per attempt and, at the end of each attempt, restarts with probability
/// q[k]. A block with delta 0 is verified before layer 0.
class SyntheticWorkload {
 public:
  SyntheticWorkload(std::vector<std::size_t> delta, std::vector<double> q, std::size_t n, std::uint64_t seed)
      : delta_(std::move(delta)), q_(std::move(q)), n_(n), rng_(seed) {
    if (delta_.size() != q_.size()) throw std::invalid_argument("delta and q differ in length");
    for (double x : q_)
      if (!(x >= 0.0 && x < 1.0)) throw std::invalid_argument("restart probability must lie in [0, 1)");
    progress_.assign(delta_.size(), 0);
    attempts_.assign(delta_.size(), 1);
    done_.assign(delta_.size(), false);
    for (std::size_t i = 0; i < delta_.size(); ++i) done_[i] = delta_[i] == 0;
  }

  std::size_t num_blocks() const { return delta_.size(); }
  std::size_t num_qubits() const { return n_; }
  bool rspv_done(std::size_t k) const { return done_.at(k - 1); }
  std::size_t attempts(std::size_t k) const { return attempts_.at(k - 1); }

  void rspv_layer(std::size_t k) {
    const std::size_t i = k - 1;
    if (++progress_[i] < delta_[i]) return;
    progress_[i] = 0;
    if (bernoulli(rng_, q_[i])) ++attempts_[i];
    else done_[i] = true;
  }

  void transfer_begin(TransferKind, std::size_t) {}
  void transfer(TransferKind, std::size_t, std::size_t, TransferStage) {}
  void begin_layer(std::size_t) {}
  void end_layer(std::size_t) {}

 private:
  std::vector<std::size_t> delta_;
  std::vector<double> q_;
  std::size_t n_;
  Rng rng_;
  std::vector<std::size_t> progress_;
  std::vector<std::size_t> attempts_;
  std::vector<bool> done_;
};

}  // namespace distclinr
