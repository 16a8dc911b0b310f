#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stsd {

using cplx = std::complex<double>;

/// Per-level "already enumerated" flags, one bit per symbol index.
class FlagMask {
 public:
  explicit FlagMask(int size = 0) : size_(size) {}

  bool test(int symbol) const { return (bits_ >> symbol) & 1U; }
  void set(int symbol) { bits_ |= std::uint64_t{1} << symbol; }
  void clear() { bits_ = 0; }

  int size() const { return size_; }
  int count() const { return __builtin_popcountll(bits_); }
  bool all() const { return count() == size_; }

 private:
  std::uint64_t bits_ = 0;
  int size_ = 0;
};

/// Square 2^Q-QAM with a programmable label table.
///
/// Symbol index layout: `index = row * side + col`, where `col` selects the
/// real amplitude and `row` the imaginary amplitude, both in ascending order.
/// A label is the unipolar bit pattern `d` with bit `b` at position `b`
/// (b = 0 .. Q-1); the bipolar bit is `x_b = 1 - 2 d_b`.
///
/// Default labeling: bits 0 .. Q/2-1 carry the binary-reflected Gray code of
/// `col`, bits Q/2 .. Q-1 the Gray code of `row`.
class Constellation {
 public:
  /// Unit-energy square QAM with the default Gray labeling. Q in {2, 4, 6}.
  static Constellation qam(int bits_per_symbol);

  /// Same grid with an explicit labeling: `label_to_symbol[label]` is the
  /// symbol index carrying that label. Must be a bijection.
  static Constellation qam(int bits_per_symbol, std::span<const int> label_to_symbol);

  /// Reads a mapping table, one line per symbol: `index bitpattern re im`.
  /// `bitpattern` is a Q-character binary string, most significant bit first.
  /// Points must coincide with the unit-energy grid.
  static Constellation from_mapping_file(const std::filesystem::path& path);
  void write_mapping_file(const std::filesystem::path& path) const;

  int bits_per_symbol() const { return q_; }
  int size() const { return static_cast<int>(points_.size()); }
  int side() const { return static_cast<int>(pam_.size()); }

  cplx point(int symbol) const { return points_[symbol]; }
  std::span<const cplx> points() const { return points_; }
  std::span<const double> pam_levels() const { return pam_; }
  double energy() const { return es_; }

  /// Mapper: label -> symbol index.
  int symbol_of(unsigned label) const { return mapper_[label]; }
  /// Demapper: symbol index -> label.
  unsigned label_of(int symbol) const { return demapper_[symbol]; }
  /// Bipolar bit b (+1 / -1) of a symbol.
  int bit(int symbol, int b) const { return ((demapper_[symbol] >> b) & 1U) ? -1 : +1; }

  /// Nearest symbol. Ties go to the smaller coordinate in each dimension.
  int slice(cplx z) const;

  /// Nearest symbol among those not flagged in `mask`, found column by
  /// column: each column takes its closest unmasked row by imaginary
  /// distance, then the columns compete on full squared distance. Equal
  /// distances resolve to the smaller symbol index. Empty when every symbol
  /// is flagged.
  std::optional<int> zigzag_next(cplx z, const FlagMask& mask) const;

 private:
  Constellation(int q, std::vector<int> mapper);

  int q_ = 0;
  double es_ = 0.0;
  std::vector<double> pam_;
  std::vector<cplx> points_;
  std::vector<int> mapper_;
  std::vector<unsigned> demapper_;
};

/// Binary-reflected Gray code and its inverse.
constexpr unsigned gray_encode(unsigned v) { return v ^ (v >> 1); }
constexpr unsigned gray_decode(unsigned g) {
  unsigned v = g;
  for (unsigned s = g >> 1; s != 0; s >>= 1) v ^= s;
  return v;
}

}  // namespace stsd
