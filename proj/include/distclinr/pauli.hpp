#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace distclinr {

/// Tensor product of single-qubit Paulis with a phase.
///
/// Each qubit carries an (x, z) bit pair: (0,0)=I, (1,0)=X, (1,1)=Y, (0,1)=Z,
/// with Y the Hermitian Pauli. The operator is i^log_i times that product.
/// Products of anticommuting strings pick up an imaginary phase; it is kept
/// internally so that composition stays associative, but only the real sign
/// is part of the public surface.
class PauliString {
 public:
  using Word = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  PauliString() = default;
  explicit PauliString(std::size_t num_qubits)
      : n_(num_qubits), xs_(words_for(num_qubits), 0), zs_(words_for(num_qubits), 0) {}

  /// Parses "+XIZY", "-ZZ" or "XYZ" (implicit +). '_' is accepted for I.
  static PauliString from_string(std::string_view text) {
    bool negative = false;
    if (!text.empty() && (text.front() == '+' || text.front() == '-')) {
      negative = text.front() == '-';
      text.remove_prefix(1);
    }
    PauliString p(text.size());
    for (std::size_t q = 0; q < text.size(); ++q) {
      switch (text[q]) {
        case 'I': case '_': break;
        case 'X': p.set(q, true, false); break;
        case 'Y': p.set(q, true, true); break;
        case 'Z': p.set(q, false, true); break;
        default: throw std::invalid_argument("bad Pauli character '" + std::string(1, text[q]) + "'");
      }
    }
    if (negative) p.negate();
    return p;
  }

  static PauliString single(std::size_t num_qubits, std::size_t q, char kind) {
    PauliString p(num_qubits);
    p.set(q, kind);
    return p;
  }

  std::size_t num_qubits() const noexcept { return n_; }
  std::size_t num_words() const noexcept { return xs_.size(); }

  bool x(std::size_t q) const { return (xs_[q / kWordBits] >> (q % kWordBits)) & 1U; }
  bool z(std::size_t q) const { return (zs_[q / kWordBits] >> (q % kWordBits)) & 1U; }

  void set(std::size_t q, bool xbit, bool zbit) {
    const Word m = Word{1} << (q % kWordBits);
    Word& xw = xs_[q / kWordBits];
    Word& zw = zs_[q / kWordBits];
    xw = xbit ? (xw | m) : (xw & ~m);
    zw = zbit ? (zw | m) : (zw & ~m);
  }
  void set(std::size_t q, char kind) {
    switch (kind) {
      case 'I': set(q, false, false); break;
      case 'X': set(q, true, false); break;
      case 'Y': set(q, true, true); break;
      case 'Z': set(q, false, true); break;
      default: throw std::invalid_argument("bad Pauli kind");
    }
  }
  void clear(std::size_t q) { set(q, false, false); }

  char at(std::size_t q) const { return "IZXY"[(x(q) << 1) | z(q)]; }

  std::span<Word> xs() noexcept { return xs_; }
  std::span<Word> zs() noexcept { return zs_; }
  std::span<const Word> xs() const noexcept { return xs_; }
  std::span<const Word> zs() const noexcept { return zs_; }

  bool is_hermitian() const noexcept { return (log_i_ & 1U) == 0; }
  /// +1 or -1. Only meaningful when is_hermitian().
  int sign() const noexcept { return (log_i_ & 2U) ? -1 : 1; }
  bool negative() const noexcept { return (log_i_ & 2U) != 0; }
  void negate() noexcept { log_i_ ^= 2U; }
  void set_sign(int s) noexcept { log_i_ = s < 0 ? 2U : 0U; }

  bool has_trivial_masks() const noexcept {
    for (std::size_t w = 0; w < xs_.size(); ++w)
      if (xs_[w] | zs_[w]) return false;
    return true;
  }
  bool is_identity() const noexcept { return has_trivial_masks() && log_i_ == 0; }

  std::size_t weight() const noexcept {
    std::size_t c = 0;
    for (std::size_t w = 0; w < xs_.size(); ++w) c += std::popcount(xs_[w] | zs_[w]);
    return c;
  }

  bool commutes(const PauliString& other) const {
    check_same_size(other);
    Word acc = 0;
    for (std::size_t w = 0; w < xs_.size(); ++w)
      acc ^= (xs_[w] & other.zs_[w]) ^ (zs_[w] & other.xs_[w]);
    return (std::popcount(acc) & 1) == 0;
  }

  /// this <- this * rhs, tracking the phase exactly.
  PauliString& operator*=(const PauliString& rhs) {
    check_same_size(rhs);
    Word cnt1 = 0;
    Word cnt2 = 0;
    for (std::size_t w = 0; w < xs_.size(); ++w) {
      const Word x1 = xs_[w], z1 = zs_[w];
      const Word x2 = rhs.xs_[w], z2 = rhs.zs_[w];
      const Word nx = x1 ^ x2, nz = z1 ^ z2;
      const Word x1z2 = x1 & z2;
      const Word anti = (x2 & z1) ^ x1z2;
      // Per-bit mod-4 counters of the +i / -i factors.
      cnt2 ^= (cnt1 ^ nx ^ nz ^ x1z2) & anti;
      cnt1 ^= anti;
      xs_[w] = nx;
      zs_[w] = nz;
    }
    const unsigned log_i = std::popcount(cnt1) + 2U * std::popcount(cnt2);
    log_i_ = static_cast<std::uint8_t>((log_i_ + rhs.log_i_ + log_i) & 3U);
    return *this;
  }

  friend PauliString operator*(PauliString lhs, const PauliString& rhs) {
    lhs *= rhs;
    return lhs;
  }

  /// Equality of masks and phase.
  friend bool operator==(const PauliString& a, const PauliString& b) {
    return a.n_ == b.n_ && a.log_i_ == b.log_i_ && a.xs_ == b.xs_ && a.zs_ == b.zs_;
  }
  bool equal_up_to_sign(const PauliString& b) const { return n_ == b.n_ && xs_ == b.xs_ && zs_ == b.zs_; }

  /// XOR of masks, ignoring phase. This is the Pauli-frame update.
  void xor_masks(const PauliString& other) {
    check_same_size(other);
    for (std::size_t w = 0; w < xs_.size(); ++w) {
      xs_[w] ^= other.xs_[w];
      zs_[w] ^= other.zs_[w];
    }
  }

  std::string str() const {
    std::string s;
    s.reserve(n_ + 2);
    if (!is_hermitian()) s += (log_i_ == 1 ? "+i" : "-i");
    else s += negative() ? '-' : '+';
    for (std::size_t q = 0; q < n_; ++q) s += at(q);
    return s;
  }

  // Heisenberg-picture conjugation P -> U P U^dagger by Clifford primitives.
  void conj_h(std::size_t q) {
    const bool xb = x(q), zb = z(q);
    if (xb && zb) negate();
    set(q, zb, xb);
  }
  void conj_s(std::size_t q) {
    const bool xb = x(q), zb = z(q);
    if (xb && zb) negate();
    set(q, xb, zb ^ xb);
  }
  void conj_sdg(std::size_t q) {
    const bool xb = x(q), zb = z(q) ^ x(q);
    if (xb && zb) negate();
    set(q, xb, zb);
  }
  void conj_x(std::size_t q) { if (z(q)) negate(); }
  void conj_y(std::size_t q) { if (x(q) ^ z(q)) negate(); }
  void conj_z(std::size_t q) { if (x(q)) negate(); }
  void conj_cx(std::size_t c, std::size_t t) {
    const bool xc = x(c), zc = z(c), xt = x(t), zt = z(t);
    if (xc && zt && !(xt ^ zc)) negate();
    set(t, xt ^ xc, zt);
    set(c, xc, zc ^ zt);
  }
  void conj_cz(std::size_t a, std::size_t b) {
    const bool xa = x(a), za = z(a), xb = x(b), zb = z(b);
    if (xa && xb && (za ^ zb)) negate();
    set(a, xa, za ^ xb);
    set(b, xb, zb ^ xa);
  }
  void conj_cy(std::size_t c, std::size_t t) {
    conj_sdg(t);
    conj_cx(c, t);
    conj_s(t);
  }
  void conj_swap(std::size_t a, std::size_t b) {
    const bool xa = x(a), za = z(a);
    set(a, x(b), z(b));
    set(b, xa, za);
  }

  /// Pauli on `qubits.size()` qubits taking factor i from qubit qubits[i].
  PauliString gather(std::span<const std::uint32_t> qubits) const {
    PauliString out(qubits.size());
    for (std::size_t i = 0; i < qubits.size(); ++i) out.set(i, x(qubits[i]), z(qubits[i]));
    out.log_i_ = log_i_;
    return out;
  }

 private:
  static std::size_t words_for(std::size_t n) { return (n + kWordBits - 1) / kWordBits; }
  void check_same_size(const PauliString& o) const {
    if (o.n_ != n_) throw std::invalid_argument("Pauli strings act on different register sizes");
  }

  std::size_t n_ = 0;
  std::vector<Word> xs_;
  std::vector<Word> zs_;
  std::uint8_t log_i_ = 0;
};

}  // namespace distclinr
