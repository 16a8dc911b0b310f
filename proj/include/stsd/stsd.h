/*
 * C interface of the SISO single tree-search sphere decoder library.
 *
 * Objects are opaque handles created and destroyed through this API. Every
 * fallible call returns an stsd_status; on failure stsd_last_error() holds a
 * message for the calling thread until its next failing call.
 *
 * Complex arrays are interleaved (re, im) doubles. Matrices are row-major.
 * LLR and bit arrays are antenna-major: element (i, b) at i * Q + b.
 */
#ifndef STSD_STSD_H
#define STSD_STSD_H

#include <stddef.h>
#include <stdint.h>

#if defined(STSD_BUILDING_LIBRARY)
#define STSD_API __attribute__((visibility("default")))
#else
#define STSD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum stsd_status {
  STSD_OK = 0,
  STSD_ERR_INVALID_ARGUMENT = 1,
  STSD_ERR_UNSUPPORTED = 2,
  STSD_ERR_RANK_DEFICIENT = 3,
  STSD_ERR_TOO_LARGE = 4,
  STSD_ERR_IO = 5,
  STSD_ERR_MISMATCH = 6,
  STSD_ERR_INTERNAL = 7
} stsd_status;

typedef enum stsd_enum_mode {
  STSD_ENUM_HYBRID = 0,
  STSD_ENUM_SE_SORT = 1,
  STSD_ENUM_CHANNEL_ONLY = 2
} stsd_enum_mode;

typedef enum stsd_qrd_mode { STSD_QRD = 0, STSD_SQRD = 1 } stsd_qrd_mode;

typedef struct stsd_constellation stsd_constellation;
typedef struct stsd_detector stsd_detector;
typedef struct stsd_sim_result stsd_sim_result;

STSD_API const char* stsd_version(void);
STSD_API const char* stsd_last_error(void);
STSD_API const char* stsd_enum_mode_name(stsd_enum_mode mode);
STSD_API const char* stsd_qrd_mode_name(stsd_qrd_mode mode);

/* ---- constellation ---------------------------------------------------- */

/* Gray-labelled unit-energy QAM; bits_per_symbol in {2, 4, 6}. */
STSD_API stsd_status stsd_constellation_create(int bits_per_symbol, stsd_constellation** out);
/* Labeling read from a mapping table ("index bitpattern re im" per line). */
STSD_API stsd_status stsd_constellation_load(const char* path, stsd_constellation** out);
STSD_API void stsd_constellation_destroy(stsd_constellation* c);
STSD_API int stsd_constellation_bits(const stsd_constellation* c);
STSD_API int stsd_constellation_size(const stsd_constellation* c);
STSD_API stsd_status stsd_constellation_point(const stsd_constellation* c, int symbol, double* re, double* im);
STSD_API stsd_status stsd_constellation_label(const stsd_constellation* c, int symbol, unsigned* label);
STSD_API stsd_status stsd_constellation_slice(const stsd_constellation* c, double re, double im, int* symbol);

/* ---- detector ---------------------------------------------------------- */

typedef struct stsd_detector_options {
  double l_e_max;             /* clipping level, INFINITY for none */
  stsd_enum_mode enum_mode;
  int normalized_metrics;     /* nonzero: metrics and LLRs carry an N0 factor */
  uint64_t node_budget;       /* 0 = unlimited */
} stsd_detector_options;

STSD_API void stsd_detector_options_init(stsd_detector_options* opts);

/* The detector takes its own copy of the constellation. */
STSD_API stsd_status stsd_detector_create(const stsd_constellation* c, const stsd_detector_options* opts,
                                          stsd_detector** out);
STSD_API void stsd_detector_destroy(stsd_detector* d);

typedef struct stsd_detection {
  double lambda_map;
  uint64_t n_en;
  int completed;
} stsd_detection;

/*
 * Detect one vector of an MT-antenna system.
 *   y_tilde : 2*mt doubles, rotated observation
 *   r       : 2*mt*mt doubles, upper-triangular factor, positive real diagonal
 *   l_a     : mt*Q a-priori LLRs (NULL for all zero)
 *   l_e     : mt*Q extrinsic LLRs out (may be NULL)
 *   x_map   : mt*Q bipolar MAP bits out (may be NULL)
 */
STSD_API stsd_status stsd_detect(stsd_detector* d, int mt, const double* y_tilde, const double* r,
                                 const double* l_a, double n0, double* l_e, int8_t* x_map, stsd_detection* info);

/* Exhaustive max-log MAP reference (Q*mt <= 20), same array conventions. */
STSD_API stsd_status stsd_exhaustive_map(const stsd_constellation* c, int mt, const double* y_tilde,
                                         const double* r, const double* l_a, double n0, double* l_e,
                                         int8_t* x_map, stsd_detection* info);

/* ---- simulation -------------------------------------------------------- */

typedef struct stsd_sim_config {
  int mt;
  int mr;
  int bits_per_symbol;
  const double* snr_db;       /* SNR = MT Es / N0 in dB */
  size_t snr_count;
  int iterations;
  int frames;
  double l_e_max_normalized;  /* N0 * L^E_max, INFINITY for none */
  stsd_enum_mode enum_mode;
  stsd_qrd_mode qrd_mode;
  int k_info;
  uint64_t seed;
  double f_clk;
  int max_frame_errors;       /* 0 = always run all frames */
  int threads;
  int spread;                 /* 0 = default */
  const char* mapping_path;   /* NULL = Gray labeling */
} stsd_sim_config;

typedef struct stsd_sim_row {
  double snr_db;
  int iteration;
  uint64_t frames;
  uint64_t frame_errors;
  uint64_t bit_errors;
  uint64_t info_bits;
  double fer;
  double fer_half_width;
  double ber;
  double mean_n_en;
  double cumulative_n_en;
  double theta_bps;
} stsd_sim_row;

typedef struct stsd_sim_info {
  int interleaver_length;
  int spread;
  int coded_bits;
  int pad_bits;
  int vectors_per_frame;
  double code_rate;
} stsd_sim_info;

/* Defaults: 4x4 16-QAM, SQRD, 512 info bits, hybrid enumeration, no clipping.
 * The default SNR list is owned by the library. */
STSD_API void stsd_sim_config_init(stsd_sim_config* cfg);
STSD_API stsd_status stsd_sim_run(const stsd_sim_config* cfg, stsd_sim_result** out);
STSD_API void stsd_sim_result_destroy(stsd_sim_result* res);
STSD_API size_t stsd_sim_result_row_count(const stsd_sim_result* res);
STSD_API stsd_status stsd_sim_result_row(const stsd_sim_result* res, size_t index, stsd_sim_row* row);
STSD_API stsd_status stsd_sim_result_info(const stsd_sim_result* res, stsd_sim_info* info);

typedef struct stsd_schedule_entry {
  double snr_db;
  int iterations;             /* 0 when the target FER is not met */
  double cumulative_n_en;
  double theta_bps;
} stsd_schedule_entry;

/* Least-effort schedule over rows; writes up to `capacity` entries (one per
 * distinct SNR) and sets *count to the number available. */
STSD_API stsd_status stsd_least_effort(const stsd_sim_row* rows, size_t row_count, double target_fer, double rate,
                                       int q, int mt, double f_clk, stsd_schedule_entry* entries, size_t capacity,
                                       size_t* count);

STSD_API double stsd_throughput(double rate, int q, int mt, double n_en, double f_clk);

/* ---- golden vectors ---------------------------------------------------- */

STSD_API stsd_status stsd_golden_export(const char* path, stsd_qrd_mode mode);
/* STSD_ERR_MISMATCH on divergence; the first divergence is written to
 * `report` (NUL-terminated, truncated to report_size). */
STSD_API stsd_status stsd_golden_check(const char* path, char* report, size_t report_size);

#ifdef __cplusplus
}
#endif

#endif /* STSD_STSD_H */
