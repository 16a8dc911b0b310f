#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <vector>

#include "stsd/error.hpp"
#include "stsd/sim.hpp"

using namespace stsd;

namespace {

SimConfig small_config() {
  SimConfig cfg;
  cfg.mt = 2;
  cfg.mr = 2;
  cfg.q = 4;
  cfg.k_info = 64;
  cfg.frames = 24;
  cfg.iterations = 3;
  cfg.snr_db = {9.0};
  cfg.max_frame_errors = 0;
  return cfg;
}

SimRow row(double snr, int it, double fer, double cum) {
  SimRow r;
  r.snr_db = snr;
  r.iteration = it;
  r.fer = fer;
  r.cumulative_n_en = cum;
  return r;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool rows_identical(const std::vector<SimRow>& a, const std::vector<SimRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const SimRow &x = a[k], &y = b[k];
    if (x.iteration != y.iteration || x.frames != y.frames || x.frame_errors != y.frame_errors ||
        x.bit_errors != y.bit_errors || x.info_bits != y.info_bits)
      return false;
    for (auto [p, q] : {std::pair{x.snr_db, y.snr_db}, {x.fer, y.fer}, {x.ber, y.ber}, {x.mean_n_en, y.mean_n_en},
                        {x.cumulative_n_en, y.cumulative_n_en}, {x.theta_bps, y.theta_bps},
                        {x.fer_half_width, y.fer_half_width}})
      if (!same_bits(p, q)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("throughput model") {
  CHECK(throughput(0.5, 4, 4, 20.0, 250e6) == 100e6);
  CHECK(throughput(0.5, 4, 4, 40.0, 250e6) == 50e6);
  CHECK(throughput(1.0, 4, 4, 20.0, 250e6) == 4 * 4 * 250e6 / 20.0);
  CHECK_THROWS_AS(throughput(0.5, 4, 4, 0.0, 250e6), Error);
}

TEST_CASE("noise variance from snr") {
  CHECK(noise_variance(0.0, 4, 1.0) == 4.0);
  CHECK(noise_variance(10.0, 4, 1.0) == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("least-effort schedule on a constructed table") {
  const std::vector<SimRow> rows{
      row(7, 1, 0.9, 110),   row(7, 2, 0.6, 200),    row(7, 3, 0.3, 280),
      row(8, 1, 0.5, 100),   row(8, 2, 0.2, 180),    row(8, 3, 0.005, 250),
      row(9, 1, 0.1, 90),    row(9, 2, 0.008, 160),  row(9, 3, 0.001, 220),
      row(10, 1, 0.009, 80), row(10, 2, 0.001, 140), row(10, 3, 0.0, 190),
      row(11, 1, 0.001, 70), row(11, 2, 0.0, 120),   row(11, 3, 0.0, 160),
  };
  const Schedule s = least_effort_schedule(rows, 0.01, 0.5, 4, 4, 250e6);
  REQUIRE(s.entries.size() == 5);
  CHECK_FALSE(s.entries[0].iterations.has_value());
  CHECK(s.entries[1].iterations == 3);
  CHECK(s.entries[2].iterations == 2);
  CHECK(s.entries[3].iterations == 1);
  CHECK(s.entries[4].iterations == 1);
  CHECK(s.entries[1].cumulative_n_en == 250);
  CHECK(s.entries[1].theta_bps == 8e6);
  CHECK(s.entries[2].theta_bps == 12.5e6);
  CHECK(s.entries[3].theta_bps == 25e6);
  CHECK(s.entries[4].theta_bps == doctest::Approx(2e9 / 70.0).epsilon(1e-15));

  REQUIRE(s.crossovers.size() == 2);
  CHECK(s.crossovers[0].from_iterations == 3);
  CHECK(s.crossovers[0].to_iterations == 2);
  CHECK(s.crossovers[0].snr_low == 8);
  CHECK(s.crossovers[0].snr_high == 9);
  CHECK(s.crossovers[1].from_iterations == 2);
  CHECK(s.crossovers[1].to_iterations == 1);
  CHECK(s.crossovers[1].snr_low == 9);
  CHECK(s.crossovers[1].snr_high == 10);

  // Throughput never drops as the SNR grows.
  for (std::size_t k = 2; k < s.entries.size(); ++k) CHECK(s.entries[k].theta_bps >= s.entries[k - 1].theta_bps);
}

TEST_CASE("schedule corner cases") {
  const std::vector<SimRow> single{row(5, 1, 0.0, 30), row(6, 1, 0.0, 25)};
  const Schedule a = least_effort_schedule(single, 0.01, 0.5, 4, 4, 250e6);
  CHECK(a.entries[0].iterations == 1);
  CHECK(a.entries[1].iterations == 1);
  CHECK(a.crossovers.empty());

  // Equal effort resolves to fewer iterations.
  const std::vector<SimRow> tie{row(5, 1, 0.0, 30), row(5, 2, 0.0, 30)};
  CHECK(least_effort_schedule(tie, 0.01, 0.5, 4, 4, 250e6).entries[0].iterations == 1);

  const std::vector<SimRow> none{row(5, 1, 0.5, 30), row(5, 2, 0.2, 60)};
  const Schedule c = least_effort_schedule(none, 0.01, 0.5, 4, 4, 250e6);
  CHECK_FALSE(c.entries[0].iterations.has_value());
  CHECK(c.crossovers.empty());
}

TEST_CASE("configuration validation") {
  SimConfig cfg = small_config();
  cfg.mr = 1;
  CHECK_THROWS_AS(Link{cfg}, Error);
  cfg = small_config();
  cfg.snr_db.clear();
  CHECK_THROWS_AS(Link{cfg}, Error);
  cfg = small_config();
  cfg.frames = 0;
  CHECK_THROWS_AS(Link{cfg}, Error);
  cfg = small_config();
  cfg.iterations = 0;
  CHECK_THROWS_AS(Link{cfg}, Error);
  cfg = small_config();
  cfg.q = 3;
  CHECK_THROWS_AS(Link{cfg}, Error);
  cfg = small_config();
  cfg.l_e_max_normalized = 0.0;
  CHECK_THROWS_AS(Link{cfg}, Error);
  CHECK(parse_qrd_mode(to_string(QrdMode::qrd)) == QrdMode::qrd);
  CHECK(parse_qrd_mode("sqrd") == QrdMode::sqrd);
  CHECK_FALSE(parse_qrd_mode("svd").has_value());
}

TEST_CASE("link metadata") {
  SimConfig cfg;
  cfg.snr_db = {10};
  const Link link(cfg);
  CHECK(link.meta().interleaver_length == 1036);
  CHECK(link.meta().spread == 16);
  CHECK(link.meta().framing.vectors == 65);
  CHECK(link.meta().framing.pad_bits == 4);
}

TEST_CASE("noiseless frames decode at the first iteration") {
  for (QrdMode mode : {QrdMode::qrd, QrdMode::sqrd}) {
    SimConfig cfg = small_config();
    cfg.qrd_mode = mode;
    cfg.frames = 8;
    const Link link(cfg);
    const auto rows = run_point(link, 0.0, true);
    for (const auto& r : rows) {
      CHECK(r.frame_errors == 0);
      CHECK(r.bit_errors == 0);
    }
  }
}

TEST_CASE("statistics are well formed") {
  SimConfig cfg = small_config();
  cfg.snr_db = {6.0, 9.0};
  const SimStats st = run(cfg);
  REQUIRE(st.rows.size() == 6);
  for (std::size_t k = 0; k < st.rows.size(); ++k) {
    const SimRow& r = st.rows[k];
    CHECK(r.fer >= 0.0);
    CHECK(r.fer <= 1.0);
    CHECK(r.frames == 24);
    CHECK(r.info_bits == 24 * 64);
    CHECK(r.mean_n_en > 0.0);
    CHECK(r.fer_half_width == doctest::Approx(1.96 * std::sqrt(r.fer * (1 - r.fer) / 24)));
    CHECK(r.theta_bps == doctest::Approx(throughput(0.5, 4, 2, r.cumulative_n_en, cfg.f_clk)));
    if (r.iteration > 1) CHECK(r.cumulative_n_en >= st.rows[k - 1].cumulative_n_en);
  }
}

TEST_CASE("runs are reproducible and independent of threading") {
  SimConfig cfg = small_config();
  cfg.snr_db = {7.0, 9.0};
  const SimStats a = run(cfg);
  const SimStats b = run(cfg);
  CHECK(rows_identical(a.rows, b.rows));
  cfg.threads = 3;
  const SimStats c = run(cfg);
  CHECK(rows_identical(a.rows, c.rows));
  cfg.threads = 1;
  cfg.seed = 2;
  CHECK_FALSE(rows_identical(a.rows, run(cfg).rows));
}

TEST_CASE("early stop after enough frame errors") {
  SimConfig cfg = small_config();
  cfg.frames = 200;
  cfg.max_frame_errors = 5;
  cfg.snr_db = {3.0};
  const Link link(cfg);
  const auto rows = run_point(link, 3.0);
  CHECK(rows.back().frame_errors == 5);
  CHECK(rows.back().frames < 200);
  // All iterations count the same frames.
  for (const auto& r : rows) CHECK(r.frames == rows.back().frames);

  cfg.threads = 4;
  const auto threaded = run_point(Link(cfg), 3.0);
  CHECK(rows_identical(rows, threaded));
}

TEST_CASE("first iteration cost equals standalone soft-output detection") {
  SimConfig cfg = small_config();
  cfg.frames = 6;
  const Link link(cfg);
  const double snr = 9.0;
  const auto rows = run_point(link, snr);

  const Constellation c = Constellation::qam(cfg.q);
  SphereDecoder d(c, {});
  std::uint64_t total = 0, count = 0;
  collect_problems(link, snr, 1, cfg.frames, [&](int it, const DetectionProblem& p) {
    CHECK(it == 1);
    for (double v : p.l_a.values()) CHECK(v == 0.0);
    total += d.detect(p.y_tilde, p.r, LlrFrame(cfg.mt, cfg.q, 0.0), p.n0).n_en;
    ++count;
  });
  CHECK(count == static_cast<std::uint64_t>(cfg.frames) * link.meta().framing.vectors);
  CHECK(rows[0].mean_n_en == static_cast<double>(total) / count);
  CHECK_THROWS_AS(collect_problems(link, snr, 4, 1, [](int, const DetectionProblem&) {}), Error);
}

TEST_CASE("later iterations see pinned padding priors") {
  SimConfig cfg = small_config();
  cfg.k_info = 61;  // 134 coded bits, 2 pad bits in 8-bit vectors
  cfg.frames = 1;
  const Link link(cfg);
  REQUIRE(link.meta().framing.pad_bits == 2);
  int seen = 0;
  collect_problems(link, 9.0, 2, 1, [&](int, const DetectionProblem& p) {
    ++seen;
    if (seen == link.meta().framing.vectors) {
      // The last vector carries the pad bits at positions 6 and 7 of the
      // un-permuted layout, i.e. antenna 1 bits 2 and 3.
      int pinned = 0;
      for (double v : p.l_a.values()) pinned += v == kPadLlr;
      CHECK(pinned == 2);
    }
  });
  CHECK(seen == link.meta().framing.vectors);
}

TEST_CASE("enumeration modes give the same decisions when unclipped") {
  SimConfig cfg = small_config();
  cfg.snr_db = {8.0};
  const SimStats hybrid = run(cfg);
  cfg.enum_mode = EnumMode::full_sort_se;
  const SimStats sorted = run(cfg);
  cfg.enum_mode = EnumMode::channel_only;
  const SimStats channel = run(cfg);
  for (std::size_t k = 0; k < hybrid.rows.size(); ++k) {
    CHECK(hybrid.rows[k].frame_errors == sorted.rows[k].frame_errors);
    CHECK(hybrid.rows[k].bit_errors == sorted.rows[k].bit_errors);
    CHECK(hybrid.rows[k].bit_errors == channel.rows[k].bit_errors);
  }
  CHECK(hybrid.rows[1].mean_n_en != sorted.rows[1].mean_n_en);
}
