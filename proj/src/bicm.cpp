#include "stsd/bicm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "stsd/error.hpp"

namespace stsd {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kRetryBudget = 200;

unsigned parity(unsigned v) { return static_cast<unsigned>(__builtin_parity(v)); }

}  // namespace

unsigned ConvCode::output(unsigned state, unsigned input) {
  const unsigned reg = (input << 6) | state;
  return parity(reg & kGenerators[0]) | (parity(reg & kGenerators[1]) << 1);
}

Bits conv_encode(std::span<const std::uint8_t> info) {
  Bits out;
  out.reserve(ConvCode::coded_length(info.size()));
  unsigned state = 0;
  auto step = [&](unsigned u) {
    const unsigned o = ConvCode::output(state, u);
    out.push_back(static_cast<std::uint8_t>(o & 1U));
    out.push_back(static_cast<std::uint8_t>(o >> 1));
    state = ConvCode::next_state(state, u);
  };
  for (auto u : info) step(u & 1U);
  for (int t = 0; t < ConvCode::kMemory; ++t) step(0);
  return out;
}

BcjrOutput maxlog_bcjr(std::span<const double> coded_llrs, std::span<const double> info_apriori) {
  if (coded_llrs.size() < 2 * (ConvCode::kMemory + 1) || coded_llrs.size() % 2 != 0)
    throw Error(ErrorCode::invalid_argument, "bcjr: coded length must be 2 (K + 6) with K >= 1");
  const std::size_t steps = coded_llrs.size() / 2;
  const std::size_t k_info = steps - ConvCode::kMemory;
  if (!info_apriori.empty() && info_apriori.size() != k_info)
    throw Error(ErrorCode::invalid_argument, "bcjr: a-priori length must equal K");

  constexpr int S = ConvCode::kStates;
  // Branch tables: output pair for (state, input).
  unsigned outputs[S][2];
  unsigned next[S][2];
  for (unsigned s = 0; s < S; ++s)
    for (unsigned u = 0; u < 2; ++u) {
      outputs[s][u] = ConvCode::output(s, u);
      next[s][u] = ConvCode::next_state(s, u);
    }

  auto gamma = [&](std::size_t t, unsigned s, unsigned u) {
    const unsigned o = outputs[s][u];
    const double l0 = coded_llrs[2 * t];
    const double l1 = coded_llrs[2 * t + 1];
    double g = 0.5 * ((o & 1U) ? -l0 : l0) + 0.5 * ((o & 2U) ? -l1 : l1);
    if (!info_apriori.empty() && t < k_info) g += 0.5 * (u ? -info_apriori[t] : info_apriori[t]);
    return g;
  };

  std::vector<double> alpha((steps + 1) * S, kNegInf);
  std::vector<double> beta((steps + 1) * S, kNegInf);
  alpha[0] = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    const double* a = &alpha[t * S];
    double* an = &alpha[(t + 1) * S];
    for (unsigned s = 0; s < S; ++s) {
      if (a[s] == kNegInf) continue;
      for (unsigned u = 0; u < 2; ++u) {
        const double v = a[s] + gamma(t, s, u);
        double& dst = an[next[s][u]];
        if (v > dst) dst = v;
      }
    }
    const double m = *std::max_element(an, an + S);
    for (int s = 0; s < S; ++s) an[s] -= m;
  }
  beta[steps * S] = 0.0;
  for (std::size_t t = steps; t-- > 0;) {
    const double* bn = &beta[(t + 1) * S];
    double* b = &beta[t * S];
    for (unsigned s = 0; s < S; ++s) {
      double best = kNegInf;
      for (unsigned u = 0; u < 2; ++u) {
        const double nb = bn[next[s][u]];
        if (nb == kNegInf) continue;
        best = std::max(best, gamma(t, s, u) + nb);
      }
      b[s] = best;
    }
    const double m = *std::max_element(b, b + S);
    for (int s = 0; s < S; ++s) b[s] -= m;
  }

  BcjrOutput out;
  out.coded_extrinsic.resize(coded_llrs.size());
  out.info_app.resize(k_info);
  out.decisions.resize(k_info);
  for (std::size_t t = 0; t < steps; ++t) {
    double info_best[2] = {kNegInf, kNegInf};
    double c0_best[2] = {kNegInf, kNegInf};
    double c1_best[2] = {kNegInf, kNegInf};
    const double* a = &alpha[t * S];
    const double* bn = &beta[(t + 1) * S];
    for (unsigned s = 0; s < S; ++s) {
      if (a[s] == kNegInf) continue;
      for (unsigned u = 0; u < 2; ++u) {
        const double nb = bn[next[s][u]];
        if (nb == kNegInf) continue;
        const double v = a[s] + gamma(t, s, u) + nb;
        const unsigned o = outputs[s][u];
        info_best[u] = std::max(info_best[u], v);
        c0_best[o & 1U] = std::max(c0_best[o & 1U], v);
        c1_best[o >> 1] = std::max(c1_best[o >> 1], v);
      }
    }
    out.coded_extrinsic[2 * t] = (c0_best[0] - c0_best[1]) - coded_llrs[2 * t];
    out.coded_extrinsic[2 * t + 1] = (c1_best[0] - c1_best[1]) - coded_llrs[2 * t + 1];
    if (t < k_info) {
      out.info_app[t] = info_best[0] - info_best[1];
      out.decisions[t] = out.info_app[t] < 0.0 ? 1 : 0;
    }
  }
  return out;
}

int default_spread(int n) {
  return std::max(1, static_cast<int>(std::lround(0.7 * std::sqrt(n / 2.0))));
}

bool satisfies_spread(std::span<const int> perm, int s) {
  const int n = static_cast<int>(perm.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j <= std::min(n - 1, i + s); ++j)
      if (std::abs(perm[i] - perm[j]) < s) return false;
  return true;
}

Interleaver make_s_random(int n, int s, Rng& rng) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "interleaver length must be positive");
  if (s < 1 || s > static_cast<int>(std::floor(std::sqrt(n / 2.0))) + (n < 2 ? 1 : 0))
    throw Error(ErrorCode::invalid_argument, "interleaver spread must satisfy 1 <= s <= floor(sqrt(n/2))");

  std::vector<int> pool(n);
  std::vector<int> perm(n);
  for (int spread = s; spread >= 1; --spread) {
    for (int attempt = 0; attempt < kRetryBudget; ++attempt) {
      std::iota(pool.begin(), pool.end(), 0);
      std::shuffle(pool.begin(), pool.end(), rng);
      std::size_t remaining = pool.size();
      bool ok = true;
      for (int i = 0; i < n && ok; ++i) {
        ok = false;
        for (std::size_t p = 0; p < remaining; ++p) {
          const int v = pool[p];
          bool fits = true;
          for (int k = std::max(0, i - spread); k < i; ++k)
            if (std::abs(v - perm[k]) < spread) {
              fits = false;
              break;
            }
          if (!fits) continue;
          perm[i] = v;
          pool[p] = pool[--remaining];
          ok = true;
          break;
        }
      }
      if (ok) return Interleaver{perm, spread};
    }
  }
  throw Error(ErrorCode::invalid_argument, "interleaver generation failed");
}

Framing make_framing(int coded_bits, int mt, int q) {
  if (mt * q < 1) throw Error(ErrorCode::invalid_argument, "framing: mt * q must be positive");
  Framing f;
  f.coded_bits = coded_bits;
  f.bits_per_vector = mt * q;
  f.vectors = (coded_bits + f.bits_per_vector - 1) / f.bits_per_vector;
  f.pad_bits = f.padded_bits() - coded_bits;
  return f;
}

Bits frame_bits(std::span<const std::uint8_t> coded, const Framing& framing) {
  if (static_cast<int>(coded.size()) != framing.coded_bits)
    throw Error(ErrorCode::invalid_argument, "framing: coded length mismatch");
  Bits out(coded.begin(), coded.end());
  out.resize(framing.padded_bits(), 0);
  return out;
}

}  // namespace stsd
