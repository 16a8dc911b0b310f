#include "stsd/stsd.h"

#include <cmath>
#include <cstring>
#include <string>

#include "stsd/constellation.hpp"
#include "stsd/detector.hpp"
#include "stsd/error.hpp"
#include "stsd/golden.hpp"
#include "stsd/oracle.hpp"
#include "stsd/sim.hpp"

struct stsd_constellation {
  stsd::Constellation value;
};

struct stsd_detector {
  stsd::SphereDecoder value;
};

struct stsd_sim_result {
  stsd::SimStats stats;
};

namespace {

thread_local std::string g_last_error;

const double kDefaultSnr[] = {12.0};

stsd_status fail(stsd_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

stsd_status from_code(stsd::ErrorCode code) {
  switch (code) {
    case stsd::ErrorCode::invalid_argument: return STSD_ERR_INVALID_ARGUMENT;
    case stsd::ErrorCode::unsupported: return STSD_ERR_UNSUPPORTED;
    case stsd::ErrorCode::rank_deficient: return STSD_ERR_RANK_DEFICIENT;
    case stsd::ErrorCode::too_large: return STSD_ERR_TOO_LARGE;
    case stsd::ErrorCode::io: return STSD_ERR_IO;
  }
  return STSD_ERR_INTERNAL;
}

template <class F>
stsd_status guarded(F&& body) {
  try {
    body();
    return STSD_OK;
  } catch (const stsd::Error& e) {
    return fail(from_code(e.code()), e.what());
  } catch (const std::exception& e) {
    return fail(STSD_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(STSD_ERR_INTERNAL, "unknown error");
  }
}

stsd::EnumMode to_enum(stsd_enum_mode m) {
  switch (m) {
    case STSD_ENUM_HYBRID: return stsd::EnumMode::hybrid;
    case STSD_ENUM_SE_SORT: return stsd::EnumMode::full_sort_se;
    case STSD_ENUM_CHANNEL_ONLY: return stsd::EnumMode::channel_only;
  }
  throw stsd::Error(stsd::ErrorCode::invalid_argument, "unknown enumeration mode");
}

stsd::QrdMode to_qrd(stsd_qrd_mode m) {
  if (m == STSD_QRD) return stsd::QrdMode::qrd;
  if (m == STSD_SQRD) return stsd::QrdMode::sqrd;
  throw stsd::Error(stsd::ErrorCode::invalid_argument, "unknown qrd mode");
}

void require(bool cond, const char* what) {
  if (!cond) throw stsd::Error(stsd::ErrorCode::invalid_argument, what);
}

struct Inputs {
  stsd::CVector y;
  stsd::CMatrix r;
  stsd::LlrFrame l_a;
};

Inputs read_inputs(int mt, int q, const double* y_tilde, const double* r, const double* l_a) {
  require(mt >= 1, "mt must be >= 1");
  require(y_tilde && r, "null input array");
  Inputs in{stsd::CVector(mt), stsd::CMatrix(mt, mt), stsd::LlrFrame(mt, q, 0.0)};
  for (int i = 0; i < mt; ++i) in.y(i) = {y_tilde[2 * i], y_tilde[2 * i + 1]};
  for (int i = 0; i < mt; ++i)
    for (int j = 0; j < mt; ++j) in.r(i, j) = {r[2 * (i * mt + j)], r[2 * (i * mt + j) + 1]};
  if (l_a)
    for (std::size_t k = 0; k < in.l_a.values().size(); ++k) in.l_a.values()[k] = l_a[k];
  return in;
}

void write_outputs(const stsd::DetectionResult& res, double* l_e, int8_t* x_map, stsd_detection* info) {
  const std::size_t n = res.l_e.values().size();
  if (l_e)
    for (std::size_t k = 0; k < n; ++k) l_e[k] = res.l_e.values()[k];
  if (x_map)
    for (std::size_t k = 0; k < n; ++k) x_map[k] = static_cast<int8_t>(res.x_map.values()[k]);
  if (info) {
    info->lambda_map = res.lambda_map;
    info->n_en = res.n_en;
    info->completed = res.completed ? 1 : 0;
  }
}

stsd_sim_row to_c(const stsd::SimRow& r) {
  return {r.snr_db, r.iteration, r.frames, r.frame_errors, r.bit_errors, r.info_bits, r.fer, r.fer_half_width,
          r.ber, r.mean_n_en, r.cumulative_n_en, r.theta_bps};
}

}  // namespace

extern "C" {

const char* stsd_version(void) { return "1.0.0"; }

const char* stsd_last_error(void) { return g_last_error.c_str(); }

const char* stsd_enum_mode_name(stsd_enum_mode mode) {
  switch (mode) {
    case STSD_ENUM_HYBRID: return "hybrid";
    case STSD_ENUM_SE_SORT: return "se-sort";
    case STSD_ENUM_CHANNEL_ONLY: return "channel-only";
  }
  return "unknown";
}

const char* stsd_qrd_mode_name(stsd_qrd_mode mode) { return mode == STSD_QRD ? "qrd" : "sqrd"; }

stsd_status stsd_constellation_create(int bits_per_symbol, stsd_constellation** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    *out = new stsd_constellation{stsd::Constellation::qam(bits_per_symbol)};
  });
}

stsd_status stsd_constellation_load(const char* path, stsd_constellation** out) {
  return guarded([&] {
    require(out != nullptr && path != nullptr, "null argument");
    *out = new stsd_constellation{stsd::Constellation::from_mapping_file(path)};
  });
}

void stsd_constellation_destroy(stsd_constellation* c) { delete c; }

int stsd_constellation_bits(const stsd_constellation* c) { return c ? c->value.bits_per_symbol() : 0; }

int stsd_constellation_size(const stsd_constellation* c) { return c ? c->value.size() : 0; }

stsd_status stsd_constellation_point(const stsd_constellation* c, int symbol, double* re, double* im) {
  return guarded([&] {
    require(c && re && im, "null argument");
    require(symbol >= 0 && symbol < c->value.size(), "symbol index out of range");
    *re = c->value.point(symbol).real();
    *im = c->value.point(symbol).imag();
  });
}

stsd_status stsd_constellation_label(const stsd_constellation* c, int symbol, unsigned* label) {
  return guarded([&] {
    require(c && label, "null argument");
    require(symbol >= 0 && symbol < c->value.size(), "symbol index out of range");
    *label = c->value.label_of(symbol);
  });
}

stsd_status stsd_constellation_slice(const stsd_constellation* c, double re, double im, int* symbol) {
  return guarded([&] {
    require(c && symbol, "null argument");
    require(std::isfinite(re) && std::isfinite(im), "point must be finite");
    *symbol = c->value.slice({re, im});
  });
}

void stsd_detector_options_init(stsd_detector_options* opts) {
  if (!opts) return;
  opts->l_e_max = INFINITY;
  opts->enum_mode = STSD_ENUM_HYBRID;
  opts->normalized_metrics = 0;
  opts->node_budget = 0;
}

stsd_status stsd_detector_create(const stsd_constellation* c, const stsd_detector_options* opts,
                                 stsd_detector** out) {
  return guarded([&] {
    require(c && out, "null argument");
    stsd::DetectorConfig cfg;
    if (opts) {
      cfg.l_e_max = opts->l_e_max;
      cfg.enum_mode = to_enum(opts->enum_mode);
      cfg.use_normalized_metrics = opts->normalized_metrics != 0;
      if (opts->node_budget > 0) cfg.node_budget = opts->node_budget;
    }
    *out = new stsd_detector{stsd::SphereDecoder(c->value, cfg)};
  });
}

void stsd_detector_destroy(stsd_detector* d) { delete d; }

stsd_status stsd_detect(stsd_detector* d, int mt, const double* y_tilde, const double* r, const double* l_a,
                        double n0, double* l_e, int8_t* x_map, stsd_detection* info) {
  return guarded([&] {
    require(d != nullptr, "null detector");
    const Inputs in = read_inputs(mt, d->value.constellation().bits_per_symbol(), y_tilde, r, l_a);
    write_outputs(d->value.detect(in.y, in.r, in.l_a, n0), l_e, x_map, info);
  });
}

stsd_status stsd_exhaustive_map(const stsd_constellation* c, int mt, const double* y_tilde, const double* r,
                                const double* l_a, double n0, double* l_e, int8_t* x_map, stsd_detection* info) {
  return guarded([&] {
    require(c != nullptr, "null constellation");
    require(n0 > 0.0, "n0 must be positive");
    const Inputs in = read_inputs(mt, c->value.bits_per_symbol(), y_tilde, r, l_a);
    write_outputs(stsd::exhaustive_map(c->value, in.y, in.r, in.l_a, n0), l_e, x_map, info);
  });
}

void stsd_sim_config_init(stsd_sim_config* cfg) {
  if (!cfg) return;
  const stsd::SimConfig d;
  cfg->mt = d.mt;
  cfg->mr = d.mr;
  cfg->bits_per_symbol = d.q;
  cfg->snr_db = kDefaultSnr;
  cfg->snr_count = sizeof kDefaultSnr / sizeof kDefaultSnr[0];
  cfg->iterations = d.iterations;
  cfg->frames = d.frames;
  cfg->l_e_max_normalized = d.l_e_max_normalized;
  cfg->enum_mode = STSD_ENUM_HYBRID;
  cfg->qrd_mode = STSD_SQRD;
  cfg->k_info = d.k_info;
  cfg->seed = d.seed;
  cfg->f_clk = d.f_clk;
  cfg->max_frame_errors = d.max_frame_errors;
  cfg->threads = d.threads;
  cfg->spread = d.spread;
  cfg->mapping_path = nullptr;
}

stsd_status stsd_sim_run(const stsd_sim_config* cfg, stsd_sim_result** out) {
  return guarded([&] {
    require(cfg && out, "null argument");
    require(cfg->snr_db != nullptr || cfg->snr_count == 0, "null snr list");
    stsd::SimConfig sc;
    sc.mt = cfg->mt;
    sc.mr = cfg->mr;
    sc.q = cfg->bits_per_symbol;
    sc.snr_db.assign(cfg->snr_db, cfg->snr_db + cfg->snr_count);
    sc.iterations = cfg->iterations;
    sc.frames = cfg->frames;
    sc.l_e_max_normalized = cfg->l_e_max_normalized;
    sc.enum_mode = to_enum(cfg->enum_mode);
    sc.qrd_mode = to_qrd(cfg->qrd_mode);
    sc.k_info = cfg->k_info;
    sc.seed = cfg->seed;
    sc.f_clk = cfg->f_clk;
    sc.max_frame_errors = cfg->max_frame_errors;
    sc.threads = cfg->threads;
    sc.spread = cfg->spread;
    if (cfg->mapping_path) sc.constellation = stsd::Constellation::from_mapping_file(cfg->mapping_path);
    *out = new stsd_sim_result{stsd::run(sc)};
  });
}

void stsd_sim_result_destroy(stsd_sim_result* res) { delete res; }

size_t stsd_sim_result_row_count(const stsd_sim_result* res) { return res ? res->stats.rows.size() : 0; }

stsd_status stsd_sim_result_row(const stsd_sim_result* res, size_t index, stsd_sim_row* row) {
  return guarded([&] {
    require(res && row, "null argument");
    require(index < res->stats.rows.size(), "row index out of range");
    *row = to_c(res->stats.rows[index]);
  });
}

stsd_status stsd_sim_result_info(const stsd_sim_result* res, stsd_sim_info* info) {
  return guarded([&] {
    require(res && info, "null argument");
    const auto& m = res->stats.meta;
    info->interleaver_length = m.interleaver_length;
    info->spread = m.spread;
    info->coded_bits = m.framing.coded_bits;
    info->pad_bits = m.framing.pad_bits;
    info->vectors_per_frame = m.framing.vectors;
    info->code_rate = stsd::SimConfig::code_rate();
  });
}

stsd_status stsd_least_effort(const stsd_sim_row* rows, size_t row_count, double target_fer, double rate, int q,
                              int mt, double f_clk, stsd_schedule_entry* entries, size_t capacity, size_t* count) {
  return guarded([&] {
    require(rows != nullptr || row_count == 0, "null rows");
    require(count != nullptr, "null count");
    std::vector<stsd::SimRow> in(row_count);
    for (size_t k = 0; k < row_count; ++k) {
      const auto& r = rows[k];
      in[k] = {r.snr_db, r.iteration, r.frames, r.frame_errors, r.bit_errors, r.info_bits,
               r.fer, r.fer_half_width, r.ber, r.mean_n_en, r.cumulative_n_en, r.theta_bps};
    }
    const auto sched = stsd::least_effort_schedule(in, target_fer, rate, q, mt, f_clk);
    *count = sched.entries.size();
    for (size_t k = 0; k < sched.entries.size() && k < capacity && entries; ++k) {
      const auto& e = sched.entries[k];
      entries[k] = {e.snr_db, e.iterations.value_or(0), e.cumulative_n_en, e.theta_bps};
    }
  });
}

double stsd_throughput(double rate, int q, int mt, double n_en, double f_clk) {
  if (!(n_en > 0.0)) return NAN;
  return stsd::throughput(rate, q, mt, n_en, f_clk);
}

stsd_status stsd_golden_export(const char* path, stsd_qrd_mode mode) {
  return guarded([&] {
    require(path != nullptr, "null path");
    stsd::write_golden(path, stsd::make_golden_set(to_qrd(mode)));
  });
}

stsd_status stsd_golden_check(const char* path, char* report, size_t report_size) {
  std::string message;
  bool mismatch = false;
  const stsd_status st = guarded([&] {
    require(path != nullptr, "null path");
    const auto res = stsd::check_golden(stsd::read_golden(path));
    mismatch = !res.ok;
    message = res.ok ? std::to_string(res.records) + " records match" : res.report;
  });
  if (st != STSD_OK) message = g_last_error;
  if (report && report_size > 0) {
    std::strncpy(report, message.c_str(), report_size - 1);
    report[report_size - 1] = '\0';
  }
  if (st != STSD_OK) return st;
  if (mismatch) return fail(STSD_ERR_MISMATCH, message);
  return STSD_OK;
}

}  // extern "C"
