#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stsd/mimo.hpp"

namespace stsd {

using Bits = std::vector<std::uint8_t>;

/// Rate-1/2 feed-forward convolutional code, constraint length 7,
/// generators 133 / 171 (octal), terminated with 6 zero tail bits.
///
/// The shift register holds the current input in bit 6 and the oldest input
/// in bit 0; generator bit 6 (the octal MSB) taps the current input. Coded
/// output is interleaved per step: c[2t] from 133, c[2t+1] from 171.
struct ConvCode {
  static constexpr int kConstraintLength = 7;
  static constexpr int kMemory = 6;
  static constexpr int kStates = 64;
  static constexpr unsigned kGenerators[2] = {0133, 0171};

  static std::size_t coded_length(std::size_t k_info) { return 2 * (k_info + kMemory); }
  /// Output pair for `state` (6 most recent inputs, newest in bit 5) and `input`.
  static unsigned output(unsigned state, unsigned input);
  static unsigned next_state(unsigned state, unsigned input) { return ((input << 6) | state) >> 1; }
};

Bits conv_encode(std::span<const std::uint8_t> info);

struct BcjrOutput {
  std::vector<double> coded_extrinsic;  // length 2 (K + 6)
  std::vector<double> info_app;         // a-posteriori info LLRs, length K
  Bits decisions;                       // hard info decisions, length K
};

/// Max-log BCJR over the 64-state trellis with both ends pinned to state 0.
/// LLRs are log P(bit = 0) / P(bit = 1). `info_apriori` may be empty
/// (all zero) or hold K values.
BcjrOutput maxlog_bcjr(std::span<const double> coded_llrs, std::span<const double> info_apriori = {});

/// Permutation with out[k] = in[perm[k]].
struct Interleaver {
  std::vector<int> perm;
  int spread = 0;

  std::size_t size() const { return perm.size(); }

  template <class T>
  std::vector<T> interleave(std::span<const T> in) const {
    std::vector<T> out(perm.size());
    for (std::size_t k = 0; k < perm.size(); ++k) out[k] = in[perm[k]];
    return out;
  }
  template <class T>
  std::vector<T> deinterleave(std::span<const T> in) const {
    std::vector<T> out(perm.size());
    for (std::size_t k = 0; k < perm.size(); ++k) out[perm[k]] = in[k];
    return out;
  }
};

/// Default spread for length n: round(0.7 sqrt(n / 2)), at least 1.
int default_spread(int n);

/// Random S-random permutation: |i - j| <= s implies |perm[i] - perm[j]| >= s.
/// Requires s <= floor(sqrt(n / 2)). If no permutation is found within the
/// retry budget the spread is lowered by one and generation restarts; the
/// spread actually achieved is stored in the result.
Interleaver make_s_random(int n, int s, Rng& rng);

bool satisfies_spread(std::span<const int> perm, int s);

/// Layout of a coded stream split into MT x Q bit vectors, with zero padding
/// at the end.
struct Framing {
  int coded_bits = 0;
  int bits_per_vector = 0;
  int vectors = 0;
  int pad_bits = 0;

  int padded_bits() const { return vectors * bits_per_vector; }
  bool is_pad(int position) const { return position >= coded_bits; }
};

Framing make_framing(int coded_bits, int mt, int q);
Bits frame_bits(std::span<const std::uint8_t> coded, const Framing& framing);
template <class T>
std::vector<T> unframe(std::span<const T> padded, const Framing& framing) {
  return {padded.begin(), padded.begin() + framing.coded_bits};
}

}  // namespace stsd
