#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "stsd/bicm.hpp"
#include "stsd/error.hpp"

using namespace stsd;

namespace {

// Direct polynomial convolution, taps listed from the current input backwards.
Bits reference_encode(const Bits& info) {
  const int g1[7] = {1, 0, 1, 1, 0, 1, 1};  // 133
  const int g2[7] = {1, 1, 1, 1, 0, 0, 1};  // 171
  Bits u = info;
  u.resize(info.size() + 6, 0);
  Bits out;
  for (std::size_t t = 0; t < u.size(); ++t) {
    int a = 0, b = 0;
    for (int k = 0; k < 7; ++k) {
      if (t < std::size_t(k)) break;
      a ^= g1[k] & u[t - k];
      b ^= g2[k] & u[t - k];
    }
    out.push_back(static_cast<std::uint8_t>(a));
    out.push_back(static_cast<std::uint8_t>(b));
  }
  return out;
}

Bits random_bits(std::size_t n, Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  Bits b(n);
  for (auto& v : b) v = coin(rng) ? 1 : 0;
  return b;
}

// Max-log decoding by listing every codeword.
struct CodewordOracle {
  std::vector<double> info_app;
  std::vector<double> coded_extrinsic;
};

CodewordOracle codeword_oracle(std::size_t k, const std::vector<double>& llr, const std::vector<double>& la) {
  const std::size_t n = 2 * (k + 6);
  std::vector<double> info_best0(k, -INFINITY), info_best1(k, -INFINITY);
  std::vector<double> coded_best0(n, -INFINITY), coded_best1(n, -INFINITY);
  for (std::size_t w = 0; w < (std::size_t{1} << k); ++w) {
    Bits info(k);
    for (std::size_t t = 0; t < k; ++t) info[t] = (w >> t) & 1U;
    const Bits cw = reference_encode(info);
    double m = 0.0;
    for (std::size_t j = 0; j < n; ++j) m += 0.5 * (cw[j] ? -llr[j] : llr[j]);
    for (std::size_t t = 0; t < la.size(); ++t) m += 0.5 * (info[t] ? -la[t] : la[t]);
    for (std::size_t t = 0; t < k; ++t) {
      auto& slot = info[t] ? info_best1[t] : info_best0[t];
      slot = std::max(slot, m);
    }
    for (std::size_t j = 0; j < n; ++j) {
      auto& slot = cw[j] ? coded_best1[j] : coded_best0[j];
      slot = std::max(slot, m);
    }
  }
  CodewordOracle o;
  for (std::size_t t = 0; t < k; ++t) o.info_app.push_back(info_best0[t] - info_best1[t]);
  for (std::size_t j = 0; j < n; ++j) o.coded_extrinsic.push_back(coded_best0[j] - coded_best1[j] - llr[j]);
  return o;
}

}  // namespace

TEST_CASE("encoder lengths and zero word") {
  CHECK(ConvCode::coded_length(512) == 1036);
  const Bits zero(512, 0);
  const Bits cw = conv_encode(zero);
  CHECK(cw.size() == 1036);
  CHECK(std::all_of(cw.begin(), cw.end(), [](auto v) { return v == 0; }));
}

TEST_CASE("impulse response") {
  Bits info(8, 0);
  info[0] = 1;
  const Bits cw = conv_encode(info);
  const Bits expected{1, 1, 0, 1, 1, 1, 1, 1, 0, 0, 1, 0, 1, 1};
  CHECK(std::equal(expected.begin(), expected.end(), cw.begin()));
  CHECK(std::all_of(cw.begin() + 14, cw.end(), [](auto v) { return v == 0; }));
  CHECK(cw == reference_encode(info));
}

TEST_CASE("encoder matches the polynomial convolution") {
  Rng rng(1);
  for (int k = 0; k < 50; ++k) {
    const Bits info = random_bits(1 + k * 7, rng);
    CHECK(conv_encode(info) == reference_encode(info));
  }
}

TEST_CASE("encoder is linear") {
  Rng rng(2);
  for (int k = 0; k < 50; ++k) {
    const Bits a = random_bits(64, rng), b = random_bits(64, rng);
    Bits x(64);
    for (int t = 0; t < 64; ++t) x[t] = a[t] ^ b[t];
    const Bits ca = conv_encode(a), cb = conv_encode(b), cx = conv_encode(x);
    for (std::size_t j = 0; j < cx.size(); ++j) CHECK(cx[j] == (ca[j] ^ cb[j]));
  }
}

TEST_CASE("bcjr on clean and empty inputs") {
  const std::vector<double> strong(2 * (20 + 6), 10.0);
  const BcjrOutput o = maxlog_bcjr(strong);
  CHECK(o.decisions == Bits(20, 0));
  for (double e : o.coded_extrinsic) CHECK(e > 0.0);

  const std::vector<double> zero(2 * (20 + 6), 0.0);
  const BcjrOutput z = maxlog_bcjr(zero);
  for (double e : z.coded_extrinsic) CHECK(e == 0.0);

  CHECK_THROWS_AS(maxlog_bcjr(std::vector<double>(13, 0.0)), Error);
  CHECK_THROWS_AS(maxlog_bcjr(std::vector<double>(10, 0.0)), Error);
  CHECK_THROWS_AS(maxlog_bcjr(strong, std::vector<double>(3, 0.0)), Error);
}

TEST_CASE("bcjr equals the exhaustive codeword oracle") {
  Rng rng(3);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t k : {1, 3, 6, 8, 10}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Bits info = random_bits(k, rng);
      const Bits cw = conv_encode(info);
      std::vector<double> llr(cw.size());
      const double sigma = 0.6 + 0.1 * trial;
      for (std::size_t j = 0; j < cw.size(); ++j)
        llr[j] = 2.0 / (sigma * sigma) * ((cw[j] ? -1.0 : 1.0) + sigma * noise(rng));
      std::vector<double> la;
      if (trial % 2) {
        la.resize(k);
        for (double& v : la) v = 2.0 * noise(rng);
      }
      const BcjrOutput got = maxlog_bcjr(llr, la);
      const CodewordOracle ref = codeword_oracle(k, llr, la);
      for (std::size_t t = 0; t < k; ++t) {
        CHECK(std::abs(got.info_app[t] - ref.info_app[t]) <= 1e-9);
        CHECK(got.decisions[t] == (ref.info_app[t] < 0.0 ? 1 : 0));
      }
      // Positions fixed across the whole code are infinite on both sides.
      for (std::size_t j = 0; j < llr.size(); ++j)
        CHECK((got.coded_extrinsic[j] == ref.coded_extrinsic[j] ||
               std::abs(got.coded_extrinsic[j] - ref.coded_extrinsic[j]) <= 1e-9));
    }
  }
}

TEST_CASE("bcjr corrects a noisy frame") {
  Rng rng(4);
  std::normal_distribution<double> noise(0.0, 0.5);
  const Bits info = random_bits(512, rng);
  const Bits cw = conv_encode(info);
  std::vector<double> llr(cw.size());
  for (std::size_t j = 0; j < cw.size(); ++j) llr[j] = 8.0 * ((cw[j] ? -1.0 : 1.0) + noise(rng));
  CHECK(maxlog_bcjr(llr).decisions == info);
}

TEST_CASE("s-random interleaver for the coded frame") {
  CHECK(default_spread(1036) == 16);
  Rng rng = make_stream(1, 99);
  const Interleaver il = make_s_random(1036, 16, rng);
  REQUIRE(il.size() == 1036);
  CHECK(il.spread == 16);
  std::vector<int> sorted = il.perm;
  std::sort(sorted.begin(), sorted.end());
  for (int k = 0; k < 1036; ++k) CHECK(sorted[k] == k);

  // Exhaustive pair scan.
  int violations = 0;
  for (int i = 0; i < 1036; ++i)
    for (int j = 0; j < 1036; ++j)
      if (i != j && std::abs(i - j) <= 16 && std::abs(il.perm[i] - il.perm[j]) < 16) ++violations;
  CHECK(violations == 0);
  CHECK(satisfies_spread(il.perm, 16));
}

TEST_CASE("interleaver round trip and determinism") {
  Rng a = make_stream(5, 1), b = make_stream(5, 1);
  const Interleaver x = make_s_random(200, 7, a), y = make_s_random(200, 7, b);
  CHECK(x.perm == y.perm);
  std::vector<double> payload(200);
  std::iota(payload.begin(), payload.end(), 0.5);
  const auto mixed = x.interleave<double>(payload);
  CHECK(mixed != payload);
  CHECK(x.deinterleave<double>(mixed) == payload);
  CHECK(x.interleave<double>(x.deinterleave<double>(payload)) == payload);

  Rng c(1);
  const Interleaver tiny = make_s_random(16, 1, c);
  CHECK(satisfies_spread(tiny.perm, 1));
}

TEST_CASE("interleaver spread limits") {
  Rng rng(6);
  CHECK_THROWS_AS(make_s_random(100, 8, rng), Error);
  CHECK_THROWS_AS(make_s_random(100, 0, rng), Error);
  // The largest legal spread is rarely reachable greedily; the achieved value
  // is reported and honoured.
  const Interleaver il = make_s_random(98, 7, rng);
  CHECK(il.spread >= 1);
  CHECK(il.spread <= 7);
  CHECK(satisfies_spread(il.perm, il.spread));
  const std::vector<int> bad{0, 1, 2, 3};
  CHECK_FALSE(satisfies_spread(bad, 2));
}

TEST_CASE("framing") {
  const Framing f = make_framing(1036, 4, 4);
  CHECK(f.vectors == 65);
  CHECK(f.pad_bits == 4);
  CHECK(f.padded_bits() == 1040);
  CHECK_FALSE(f.is_pad(1035));
  CHECK(f.is_pad(1036));

  const Framing even = make_framing(1040, 4, 4);
  CHECK(even.pad_bits == 0);
  CHECK(even.vectors == 65);

  Rng rng(7);
  const Bits coded = random_bits(1036, rng);
  const Bits framed = frame_bits(coded, f);
  CHECK(framed.size() == 1040);
  CHECK(std::all_of(framed.begin() + 1036, framed.end(), [](auto v) { return v == 0; }));
  CHECK(unframe<std::uint8_t>(framed, f) == coded);
  CHECK_THROWS_AS(frame_bits(Bits(10, 0), f), Error);
  CHECK_THROWS_AS(make_framing(10, 0, 4), Error);
}
