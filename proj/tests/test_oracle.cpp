#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "stsd/error.hpp"
#include "stsd/oracle.hpp"
#include "support.hpp"

using namespace stsd;
using stsd::test::Instance;
using stsd::test::random_instance;

namespace {

// Full-vector metric from scratch: |y - R s|^2 / N0 plus per-bit prior terms.
double direct_metric(const Constellation& c, const Instance& in, const std::vector<int>& s) {
  const int mt = static_cast<int>(s.size());
  CVector sv(mt);
  for (int i = 0; i < mt; ++i) sv(i) = c.point(s[i]);
  double m = (in.y - in.r * sv).squaredNorm() / in.n0;
  for (int i = 0; i < mt; ++i)
    for (int b = 0; b < c.bits_per_symbol(); ++b) {
      const double l = in.l_a(i, b);
      const int x = c.bit(s[i], b);
      if ((l < 0.0 ? -1 : 1) != x) m += std::abs(l);
    }
  return m;
}

}  // namespace

TEST_CASE("single antenna qpsk on a symbol") {
  const auto c = Constellation::qam(2);
  for (double n0 : {1.0, 0.5}) {
    CVector y(1);
    y(0) = c.point(3);
    const DetectionResult r = exhaustive_map(c, y, CMatrix::Identity(1, 1), LlrFrame(1, 2, 0.0), n0);
    CHECK(r.lambda_map == 0.0);
    CHECK(r.n_en == 4);
    for (int b = 0; b < 2; ++b) {
      CHECK(r.x_map(0, b) == c.bit(3, b));
      CHECK(std::abs(std::abs(r.l_e(0, b)) - 2.0 / n0) < 1e-12);
    }
  }
}

TEST_CASE("lambda is the minimum over all vectors") {
  const auto c = Constellation::qam(4);
  Rng rng(1);
  for (int k = 0; k < 20; ++k) {
    const Instance in = random_instance(c, 2, 10.0, 1.5, rng);
    const DetectionResult r = exhaustive_map(c, in.y, in.r, in.l_a, in.n0);
    double best = kInf;
    std::vector<int> arg;
    for (int a = 0; a < 16; ++a)
      for (int b = 0; b < 16; ++b) {
        const double m = direct_metric(c, in, {a, b});
        if (m < best) {
          best = m;
          arg = {a, b};
        }
      }
    CHECK(std::abs(r.lambda_map - best) <= 1e-9);
    for (int i = 0; i < 2; ++i)
      for (int b = 0; b < 4; ++b) CHECK(r.x_map(i, b) == c.bit(arg[i], b));
    CHECK(r.n_en == 256);
  }
}

TEST_CASE("counter-hypotheses from a second brute force") {
  const auto c = Constellation::qam(2);
  Rng rng(2);
  for (int k = 0; k < 50; ++k) {
    const Instance in = random_instance(c, 3, 4.0, 1.0, rng);
    const DetectionResult r = exhaustive_map(c, in.y, in.r, in.l_a, in.n0);
    for (int i = 0; i < 3; ++i)
      for (int b = 0; b < 2; ++b) {
        double counter = kInf;
        for (int v = 0; v < 64; ++v) {
          const std::vector<int> s{v % 4, (v / 4) % 4, v / 16};
          if (c.bit(s[i], b) != r.x_map(i, b)) counter = std::min(counter, direct_metric(c, in, s));
        }
        const double ext = counter - in.l_a(i, b) * r.x_map(i, b);
        CHECK(std::abs(r.lam_bar(i, b) - ext) <= 1e-9);
        CHECK(std::abs(r.l_e(i, b) - (ext - r.lambda_map) * r.x_map(i, b)) <= 1e-9);
      }
  }
}

TEST_CASE("telescoped level metrics equal the direct path metric") {
  const auto c = Constellation::qam(4);
  Rng rng(3);
  std::uniform_int_distribution<int> pick(0, 15);
  for (int k = 0; k < 100; ++k) {
    const Instance in = random_instance(c, 4, 12.0, 2.0, rng);
    std::vector<int> s(4);
    for (int& v : s) v = pick(rng);
    double sum = 0.0;
    for (int level = 3; level >= 0; --level) {
      const std::vector<int> tail(s.begin() + level + 1, s.end());
      sum += metric_table(c, in.y, in.r, in.l_a, in.n0, level, tail)[s[level]].m_p;
    }
    const double full = path_metric(c, in.y, in.r, in.l_a, in.n0, s);
    const double direct = direct_metric(c, in, s);
    CHECK(std::abs(sum - full) <= 1e-9 * std::max(1.0, full));
    CHECK(std::abs(direct - full) <= 1e-9 * std::max(1.0, full));
  }
}

TEST_CASE("metric table rows") {
  const auto c = Constellation::qam(6);
  Rng rng(4);
  const Instance zero = random_instance(c, 2, 15.0, 0.0, rng);
  const auto rows = metric_table(c, zero.y, zero.r, zero.l_a, zero.n0, 0, {5});
  CHECK(rows.size() == 64);
  for (const MetricRow& row : rows) {
    CHECK(row.m_a == 0.0);
    CHECK(row.m_p == row.m_c + row.m_a);
  }
  const Instance in = random_instance(c, 2, 15.0, 3.0, rng);
  for (const MetricRow& row : metric_table(c, in.y, in.r, in.l_a, in.n0, 1, {})) {
    CHECK(row.m_a >= 0.0);
    CHECK(row.m_p == row.m_c + row.m_a);
  }
  CHECK_THROWS_AS(metric_table(c, in.y, in.r, in.l_a, in.n0, 0, {}), Error);
  CHECK_THROWS_AS(metric_table(c, in.y, in.r, in.l_a, in.n0, 2, {}), Error);
}

TEST_CASE("relabeling with flipped priors leaves lambda unchanged") {
  const auto gray = Constellation::qam(4);
  std::vector<int> table(16);
  for (unsigned l = 0; l < 16; ++l) table[l] = gray.symbol_of(l ^ 0xFU);
  const auto flipped = Constellation::qam(4, table);
  Rng rng(5);
  for (int k = 0; k < 30; ++k) {
    const Instance in = random_instance(gray, 2, 10.0, 2.0, rng);
    LlrFrame neg = in.l_a;
    for (double& v : neg.values()) v = -v;
    const DetectionResult a = exhaustive_map(gray, in.y, in.r, in.l_a, in.n0);
    const DetectionResult b = exhaustive_map(flipped, in.y, in.r, neg, in.n0);
    CHECK(std::abs(a.lambda_map - b.lambda_map) <= 1e-12);
    for (std::size_t e = 0; e < a.x_map.values().size(); ++e) CHECK(a.x_map.values()[e] == -b.x_map.values()[e]);
  }
}

TEST_CASE("oversized problems are refused") {
  const auto c = Constellation::qam(6);
  const CVector y = CVector::Zero(4);
  try {
    exhaustive_map(c, y, CMatrix::Identity(4, 4), LlrFrame(4, 6), 1.0);
    FAIL("expected too_large");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::too_large);
  }
}
