#include "stsd/sim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "stsd/error.hpp"

namespace stsd {

std::string_view to_string(QrdMode mode) { return mode == QrdMode::qrd ? "qrd" : "sqrd"; }

std::optional<QrdMode> parse_qrd_mode(std::string_view name) {
  if (name == "qrd") return QrdMode::qrd;
  if (name == "sqrd") return QrdMode::sqrd;
  return std::nullopt;
}

void SimConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::invalid_argument, m); };
  if (mt < 1 || mr < mt) fail("need mr >= mt >= 1");
  if (q != 2 && q != 4 && q != 6) throw Error(ErrorCode::unsupported, "unsupported bits per symbol");
  if (constellation && constellation->bits_per_symbol() != q) fail("mapping table does not match modulation");
  if (snr_db.empty()) fail("snr list must not be empty");
  if (iterations < 1) fail("iterations must be >= 1");
  if (frames < 1) fail("frames must be >= 1");
  if (!(l_e_max_normalized > 0.0)) fail("clipping level must be positive");
  if (k_info < 1) fail("k_info must be >= 1");
  if (!(f_clk > 0.0)) fail("f_clk must be positive");
  if (max_frame_errors < 0) fail("max_frame_errors must be >= 0");
  if (threads < 1) fail("threads must be >= 1");
  if (spread < 0) fail("spread must be >= 0");
}

double throughput(double rate, int q, int mt, double n_en, double f_clk) {
  if (!(n_en > 0.0)) throw Error(ErrorCode::invalid_argument, "throughput: n_en must be positive");
  return rate * q * mt * f_clk / n_en;
}

double noise_variance(double snr_db, int mt, double es) { return mt * es / std::pow(10.0, snr_db / 10.0); }

Link::Link(const SimConfig& cfg)
    : cfg_(cfg), constellation_(cfg.constellation ? *cfg.constellation : Constellation::qam(cfg.q)) {
  cfg_.validate();
  const int coded = static_cast<int>(ConvCode::coded_length(cfg_.k_info));
  const int max_spread = std::max(1, static_cast<int>(std::floor(std::sqrt(coded / 2.0))));
  const int spread = std::min(cfg_.spread > 0 ? cfg_.spread : default_spread(coded), max_spread);
  // Stream index 2^63 is reserved for the interleaver; frames use 0, 1, ...
  Rng rng = make_stream(cfg_.seed, std::uint64_t{1} << 63);
  interleaver_ = make_s_random(coded, spread, rng);
  meta_.interleaver_length = coded;
  meta_.spread = interleaver_.spread;
  meta_.framing = make_framing(coded, cfg_.mt, constellation_.bits_per_symbol());
}

FrameOutcome Link::run_frame(double snr_db, std::uint64_t frame_index, const ProblemHook& hook,
                             bool noiseless) const {
  const int mt = cfg_.mt;
  const int q = constellation_.bits_per_symbol();
  const int iters = cfg_.iterations;
  const Framing& fr = meta_.framing;
  const double n0 = noise_variance(snr_db, mt, constellation_.energy());

  Rng rng = make_stream(cfg_.seed, frame_index);
  Bits info(cfg_.k_info);
  for (auto& b : info) b = static_cast<std::uint8_t>(rng() & 1U);
  const Bits coded = conv_encode(info);
  const Bits tx = frame_bits(interleaver_.interleave<std::uint8_t>(coded), fr);

  struct Vector {
    CVector y_tilde;
    CMatrix r;
    std::vector<int> perm;
  };
  std::vector<Vector> vectors(fr.vectors);
  for (int v = 0; v < fr.vectors; ++v) {
    CVector s(mt);
    for (int i = 0; i < mt; ++i) {
      unsigned label = 0;
      for (int b = 0; b < q; ++b) label |= unsigned{tx[v * fr.bits_per_vector + i * q + b]} << b;
      s(i) = constellation_.point(constellation_.symbol_of(label));
    }
    const CMatrix h = sample_channel(cfg_.mr, mt, rng);
    const CVector y = transmit(h, s, n0, rng, noiseless);
    QrFactors qr = cfg_.qrd_mode == QrdMode::sqrd ? sqrd(h) : qrd(h);
    vectors[v] = {preprocess(y, qr), std::move(qr.r), std::move(qr.perm)};
  }

  DetectorConfig dcfg;
  dcfg.enum_mode = cfg_.enum_mode;
  dcfg.l_e_max = cfg_.l_e_max_normalized == kInf ? kInf : cfg_.l_e_max_normalized / n0;
  SphereDecoder decoder(constellation_, dcfg);

  FrameOutcome out;
  out.frame_error.assign(iters, 0);
  out.bit_errors.assign(iters, 0);
  out.n_en.assign(iters, 0);
  out.vectors = static_cast<std::uint64_t>(fr.vectors);

  std::vector<double> apriori(fr.padded_bits(), 0.0);  // interleaved domain
  std::vector<double> demapped(fr.padded_bits(), 0.0);
  DetectionProblem problem;
  problem.n0 = n0;
  problem.l_a = LlrFrame(mt, q);

  for (int it = 0; it < iters; ++it) {
    for (int v = 0; v < fr.vectors; ++v) {
      const Vector& vec = vectors[v];
      for (int k = 0; k < mt; ++k)
        for (int b = 0; b < q; ++b) problem.l_a(k, b) = apriori[v * fr.bits_per_vector + vec.perm[k] * q + b];
      if (hook) {
        problem.y_tilde = vec.y_tilde;
        problem.r = vec.r;
        hook(it + 1, problem);
      }
      const DetectionResult det = decoder.detect(vec.y_tilde, vec.r, problem.l_a, n0);
      out.n_en[it] += det.n_en;
      for (int k = 0; k < mt; ++k)
        for (int b = 0; b < q; ++b) demapped[v * fr.bits_per_vector + vec.perm[k] * q + b] = det.l_e(k, b);
    }

    const std::vector<double> channel =
        interleaver_.deinterleave<double>(unframe<double>(std::span<const double>(demapped), fr));
    const BcjrOutput dec = maxlog_bcjr(channel);
    std::uint64_t errors = 0;
    for (int k = 0; k < cfg_.k_info; ++k) errors += dec.decisions[k] != info[k];
    out.bit_errors[it] = errors;
    out.frame_error[it] = errors > 0;

    if (it + 1 < iters) {
      const std::vector<double> fed = interleaver_.interleave<double>(dec.coded_extrinsic);
      std::copy(fed.begin(), fed.end(), apriori.begin());
      for (int p = fr.coded_bits; p < fr.padded_bits(); ++p) apriori[p] = kPadLlr;
    }
  }
  return out;
}

namespace {

std::vector<FrameOutcome> run_frames(const Link& link, double snr_db, std::uint64_t first, int count,
                                     const ProblemHook& hook, bool noiseless) {
  std::vector<FrameOutcome> out(count);
  const int threads = std::min(link.config().threads, count);
  if (threads <= 1 || hook) {
    for (int k = 0; k < count; ++k) out[k] = link.run_frame(snr_db, first + k, hook, noiseless);
    return out;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (int k = t; k < count; k += threads) out[k] = link.run_frame(snr_db, first + k, {}, noiseless);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace

std::vector<SimRow> run_point(const Link& link, double snr_db, bool noiseless) {
  const SimConfig& cfg = link.config();
  const int iters = cfg.iterations;
  std::vector<std::uint64_t> fe(iters, 0), be(iters, 0), nen(iters, 0);
  std::uint64_t frames = 0;
  std::uint64_t vectors = 0;
  const int chunk = std::max(1, cfg.threads) * 8;

  bool stop = false;
  for (int done = 0; done < cfg.frames && !stop; done += chunk) {
    const int n = std::min(chunk, cfg.frames - done);
    const auto outcomes = run_frames(link, snr_db, static_cast<std::uint64_t>(done), n, {}, noiseless);
    for (const auto& o : outcomes) {
      for (int it = 0; it < iters; ++it) {
        fe[it] += o.frame_error[it];
        be[it] += o.bit_errors[it];
        nen[it] += o.n_en[it];
      }
      vectors += o.vectors;
      ++frames;
      if (cfg.max_frame_errors > 0 && fe[iters - 1] >= static_cast<std::uint64_t>(cfg.max_frame_errors)) {
        stop = true;
        break;
      }
    }
  }

  std::vector<SimRow> rows(iters);
  double cumulative = 0.0;
  for (int it = 0; it < iters; ++it) {
    SimRow& r = rows[it];
    r.snr_db = snr_db;
    r.iteration = it + 1;
    r.frames = frames;
    r.frame_errors = fe[it];
    r.bit_errors = be[it];
    r.info_bits = frames * static_cast<std::uint64_t>(cfg.k_info);
    r.fer = static_cast<double>(fe[it]) / frames;
    r.fer_half_width = 1.96 * std::sqrt(r.fer * (1.0 - r.fer) / frames);
    r.ber = static_cast<double>(be[it]) / r.info_bits;
    r.mean_n_en = static_cast<double>(nen[it]) / vectors;
    cumulative += r.mean_n_en;
    r.cumulative_n_en = cumulative;
    r.theta_bps = throughput(SimConfig::code_rate(), link.constellation().bits_per_symbol(), cfg.mt, cumulative,
                             cfg.f_clk);
  }
  return rows;
}

SimStats run(const SimConfig& cfg) {
  const Link link(cfg);
  SimStats stats;
  stats.meta = link.meta();
  for (double snr : cfg.snr_db) {
    auto rows = run_point(link, snr);
    stats.rows.insert(stats.rows.end(), rows.begin(), rows.end());
  }
  return stats;
}

void collect_problems(const Link& link, double snr_db, int iteration, int frames, const ProblemHook& hook) {
  if (iteration < 1 || iteration > link.config().iterations)
    throw Error(ErrorCode::invalid_argument, "collect_problems: iteration out of range");
  const ProblemHook filtered = [&](int it, const DetectionProblem& p) {
    if (it == iteration) hook(it, p);
  };
  for (int f = 0; f < frames; ++f) link.run_frame(snr_db, static_cast<std::uint64_t>(f), filtered);
}

Schedule least_effort_schedule(std::span<const SimRow> rows, double target_fer, double rate, int q, int mt,
                               double f_clk) {
  std::vector<double> snrs;
  for (const auto& r : rows) snrs.push_back(r.snr_db);
  std::sort(snrs.begin(), snrs.end());
  snrs.erase(std::unique(snrs.begin(), snrs.end()), snrs.end());

  Schedule out;
  for (double snr : snrs) {
    ScheduleEntry e;
    e.snr_db = snr;
    for (const auto& r : rows) {
      if (r.snr_db != snr || r.fer > target_fer) continue;
      if (!e.iterations || r.cumulative_n_en < e.cumulative_n_en ||
          (r.cumulative_n_en == e.cumulative_n_en && r.iteration < *e.iterations)) {
        e.iterations = r.iteration;
        e.cumulative_n_en = r.cumulative_n_en;
      }
    }
    if (e.iterations) e.theta_bps = throughput(rate, q, mt, e.cumulative_n_en, f_clk);
    out.entries.push_back(e);
  }

  const ScheduleEntry* prev = nullptr;
  for (const auto& e : out.entries) {
    if (!e.iterations) continue;
    if (prev && *prev->iterations != *e.iterations)
      out.crossovers.push_back({*prev->iterations, *e.iterations, prev->snr_db, e.snr_db});
    prev = &e;
  }
  return out;
}

}  // namespace stsd
