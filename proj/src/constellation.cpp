#include "stsd/constellation.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "stsd/error.hpp"

namespace stsd {

namespace {

void check_bits_per_symbol(int q) {
  if (q != 2 && q != 4 && q != 6)
    throw Error(ErrorCode::unsupported, "unsupported bits per symbol " + std::to_string(q) +
                                            " (expected 2, 4 or 6)");
}

std::vector<int> gray_mapper(int q) {
  const int half = q / 2;
  const unsigned side = 1U << half;
  std::vector<int> mapper(std::size_t{1} << q);
  for (unsigned label = 0; label < mapper.size(); ++label) {
    const unsigned col = gray_decode(label & (side - 1));
    const unsigned row = gray_decode(label >> half);
    mapper[label] = static_cast<int>(row * side + col);
  }
  return mapper;
}

}  // namespace

Constellation::Constellation(int q, std::vector<int> mapper) : q_(q), mapper_(std::move(mapper)) {
  const int side = 1 << (q / 2);
  const int n = side * side;
  if (static_cast<int>(mapper_.size()) != n)
    throw Error(ErrorCode::invalid_argument, "mapping table must have 2^Q entries");

  demapper_.assign(n, 0);
  std::vector<bool> seen(n, false);
  for (int label = 0; label < n; ++label) {
    const int s = mapper_[label];
    if (s < 0 || s >= n || seen[s])
      throw Error(ErrorCode::invalid_argument, "mapping table is not a bijection");
    seen[s] = true;
    demapper_[s] = static_cast<unsigned>(label);
  }

  // Per-dimension variance of {±1, ±3, ...} is (side^2 - 1) / 3.
  const double scale = 1.0 / std::sqrt(2.0 * (side * side - 1) / 3.0);
  pam_.resize(side);
  for (int k = 0; k < side; ++k) pam_[k] = (2 * k - (side - 1)) * scale;

  points_.resize(n);
  double energy = 0.0;
  for (int row = 0; row < side; ++row)
    for (int col = 0; col < side; ++col) {
      const cplx p{pam_[col], pam_[row]};
      points_[row * side + col] = p;
      energy += std::norm(p);
    }
  es_ = energy / n;
}

Constellation Constellation::qam(int bits_per_symbol) {
  check_bits_per_symbol(bits_per_symbol);
  return Constellation(bits_per_symbol, gray_mapper(bits_per_symbol));
}

Constellation Constellation::qam(int bits_per_symbol, std::span<const int> label_to_symbol) {
  check_bits_per_symbol(bits_per_symbol);
  return Constellation(bits_per_symbol, {label_to_symbol.begin(), label_to_symbol.end()});
}

Constellation Constellation::from_mapping_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open mapping file " + path.string());

  struct Entry {
    int index;
    std::string pattern;
    double re, im;
  };
  std::vector<Entry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    Entry e{};
    if (!(ls >> e.index >> e.pattern >> e.re >> e.im))
      throw Error(ErrorCode::invalid_argument, "malformed mapping line: " + line);
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw Error(ErrorCode::invalid_argument, "empty mapping file");

  const int q = static_cast<int>(entries.front().pattern.size());
  check_bits_per_symbol(q);
  const int n = 1 << q;
  if (static_cast<int>(entries.size()) != n)
    throw Error(ErrorCode::invalid_argument, "mapping file must list exactly 2^Q symbols");

  std::vector<int> mapper(n, -1);
  for (const auto& e : entries) {
    if (static_cast<int>(e.pattern.size()) != q || e.index < 0 || e.index >= n)
      throw Error(ErrorCode::invalid_argument, "bad mapping entry for index " + std::to_string(e.index));
    unsigned label = 0;
    for (char c : e.pattern) {
      if (c != '0' && c != '1')
        throw Error(ErrorCode::invalid_argument, "bit pattern must be binary: " + e.pattern);
      label = (label << 1) | static_cast<unsigned>(c - '0');
    }
    if (mapper[label] != -1)
      throw Error(ErrorCode::invalid_argument, "mapping table is not a bijection");
    mapper[label] = e.index;
  }

  Constellation c(q, std::move(mapper));
  for (const auto& e : entries)
    if (std::abs(c.point(e.index) - cplx{e.re, e.im}) > 1e-6)
      throw Error(ErrorCode::invalid_argument,
                  "point for index " + std::to_string(e.index) + " is off the unit-energy grid");
  return c;
}

void Constellation::write_mapping_file(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write mapping file " + path.string());
  out.precision(17);
  for (int s = 0; s < size(); ++s) {
    std::string pattern(q_, '0');
    for (int b = 0; b < q_; ++b)
      if ((demapper_[s] >> b) & 1U) pattern[q_ - 1 - b] = '1';
    out << s << ' ' << pattern << ' ' << points_[s].real() << ' ' << points_[s].imag() << '\n';
  }
}

int Constellation::slice(cplx z) const {
  const int side = this->side();
  auto nearest = [&](double v) {
    int best = 0;
    double best_d = std::abs(v - pam_[0]);
    for (int k = 1; k < side; ++k) {
      const double d = std::abs(v - pam_[k]);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    return best;
  };
  return nearest(z.imag()) * side + nearest(z.real());
}

std::optional<int> Constellation::zigzag_next(cplx z, const FlagMask& mask) const {
  const int side = this->side();
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int col = 0; col < side; ++col) {
    const double dre = z.real() - pam_[col];
    int row_pick = -1;
    double row_d = std::numeric_limits<double>::infinity();
    for (int row = 0; row < side; ++row) {
      if (mask.test(row * side + col)) continue;
      const double dim = std::abs(z.imag() - pam_[row]);
      if (dim < row_d) {
        row_d = dim;
        row_pick = row;
      }
    }
    if (row_pick < 0) continue;
    const double dim = z.imag() - pam_[row_pick];
    const double d = dre * dre + dim * dim;
    const int symbol = row_pick * side + col;
    if (d < best_d || (d == best_d && symbol < best)) {
      best_d = d;
      best = symbol;
    }
  }
  if (best < 0) return std::nullopt;
  return best;
}

}  // namespace stsd
