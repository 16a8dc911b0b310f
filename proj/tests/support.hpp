#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "stsd/constellation.hpp"
#include "stsd/detector.hpp"
#include "stsd/mimo.hpp"

namespace stsd::test {

struct Instance {
  CVector y;
  CMatrix r;
  LlrFrame l_a;
  double n0 = 1.0;
  std::vector<int> symbols;  // transmitted, in detector (permuted) order
};

// Rayleigh channel, SQRD, noise at `snr_db` (MT Es / N0), a-priori LLRs drawn
// as consistent Gaussians around the transmitted bits with mean `la_mean`
// (0 gives zero a-priori input).
inline Instance random_instance(const Constellation& c, int mt, double snr_db, double la_mean, Rng& rng) {
  Instance in;
  in.n0 = mt * c.energy() / std::pow(10.0, snr_db / 10.0);
  const CMatrix h = sample_channel(mt, mt, rng);
  const QrFactors qr = sqrd(h);
  std::uniform_int_distribution<int> pick(0, c.size() - 1);
  CVector s(mt);
  std::vector<int> sym(mt);
  for (int i = 0; i < mt; ++i) {
    sym[i] = pick(rng);
    s(i) = c.point(sym[i]);
  }
  const CVector y = transmit(h, s, in.n0, rng);
  in.y = preprocess(y, qr);
  in.r = qr.r;
  in.symbols.resize(mt);
  for (int i = 0; i < mt; ++i) in.symbols[i] = sym[qr.perm[i]];

  const int q = c.bits_per_symbol();
  in.l_a = LlrFrame(mt, q, 0.0);
  if (la_mean > 0.0) {
    std::normal_distribution<double> noise(0.0, std::sqrt(2.0 * la_mean));
    for (int i = 0; i < mt; ++i)
      for (int b = 0; b < q; ++b) in.l_a(i, b) = la_mean * c.bit(in.symbols[i], b) + noise(rng);
  }
  return in;
}

inline double max_abs_diff(const LlrFrame& a, const LlrFrame& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.values().size(); ++k) {
    const double x = a.values()[k], y = b.values()[k];
    if (x == y) continue;  // covers equal infinities
    m = std::max(m, std::abs(x - y));
  }
  return m;
}

}  // namespace stsd::test
