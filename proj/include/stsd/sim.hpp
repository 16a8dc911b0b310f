#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "stsd/bicm.hpp"
#include "stsd/constellation.hpp"
#include "stsd/detector.hpp"
#include "stsd/mimo.hpp"

namespace stsd {

enum class QrdMode { qrd, sqrd };

std::string_view to_string(QrdMode mode);
std::optional<QrdMode> parse_qrd_mode(std::string_view name);

/// A-priori LLR given to the demapper for zero padding bits (known to the
/// receiver) from the second iteration on.
inline constexpr double kPadLlr = 100.0;

struct SimConfig {
  int mt = 4;
  int mr = 4;
  int q = 4;
  std::vector<double> snr_db{12.0};  // SNR = MT Es / N0
  int iterations = 4;
  int frames = 100;
  double l_e_max_normalized = kInf;  // N0 L^E_max
  EnumMode enum_mode = EnumMode::hybrid;
  QrdMode qrd_mode = QrdMode::sqrd;
  int k_info = 512;
  std::uint64_t seed = 1;
  double f_clk = 250e6;
  int max_frame_errors = 100;  // stop a point once the last iteration has this many; 0 = never
  int threads = 1;
  int spread = 0;            // 0 = default_spread(coded length)
  std::optional<Constellation> constellation;  // custom labeling; Gray QAM otherwise

  static constexpr double code_rate() { return 0.5; }
  void validate() const;
};

struct SimRow {
  double snr_db = 0.0;
  int iteration = 0;
  std::uint64_t frames = 0;
  std::uint64_t frame_errors = 0;
  std::uint64_t bit_errors = 0;
  std::uint64_t info_bits = 0;
  double fer = 0.0;
  double fer_half_width = 0.0;  // binomial 95 %
  double ber = 0.0;
  double mean_n_en = 0.0;        // this iteration's demapper call, per vector
  double cumulative_n_en = 0.0;  // sum over iterations 1..k
  double theta_bps = 0.0;
};

struct SimMeta {
  int interleaver_length = 0;
  int spread = 0;
  Framing framing;
};

struct SimStats {
  std::vector<SimRow> rows;
  SimMeta meta;
};

/// Inputs of one demapper call, after preprocessing (a-priori rows permuted).
struct DetectionProblem {
  CVector y_tilde;
  CMatrix r;
  LlrFrame l_a;
  double n0 = 1.0;
};

using ProblemHook = std::function<void(int iteration, const DetectionProblem&)>;

/// ONPC throughput model: rate Q MT f_clk / E[N_en] in bit/s.
double throughput(double rate, int q, int mt, double n_en, double f_clk);

/// Noise variance for an SNR in dB given MT and symbol energy.
double noise_variance(double snr_db, int mt, double es);

/// Per-iteration statistics of one frame.
struct FrameOutcome {
  std::vector<std::uint8_t> frame_error;
  std::vector<std::uint64_t> bit_errors;
  std::vector<std::uint64_t> n_en;
  std::uint64_t vectors = 0;
};

/// Fixed parts of the BICM link (constellation, interleaver, framing).
class Link {
 public:
  explicit Link(const SimConfig& cfg);

  const SimConfig& config() const { return cfg_; }
  const SimMeta& meta() const { return meta_; }
  const Constellation& constellation() const { return constellation_; }

  /// One frame through the full iterative receiver. Randomness is drawn from
  /// the (seed, frame_index) stream only. `noiseless` suppresses channel noise.
  FrameOutcome run_frame(double snr_db, std::uint64_t frame_index, const ProblemHook& hook = {},
                         bool noiseless = false) const;

 private:
  SimConfig cfg_;
  Constellation constellation_;
  Interleaver interleaver_;
  SimMeta meta_;
};

std::vector<SimRow> run_point(const Link& link, double snr_db, bool noiseless = false);
SimStats run(const SimConfig& cfg);

/// Feeds every demapper call of `iteration` (1-based) to `hook` for the first
/// `frames` frames at `snr_db`.
void collect_problems(const Link& link, double snr_db, int iteration, int frames, const ProblemHook& hook);

struct ScheduleEntry {
  double snr_db = 0.0;
  std::optional<int> iterations;  // empty when no iteration count meets the target
  double cumulative_n_en = 0.0;
  double theta_bps = 0.0;
};

struct Crossover {
  int from_iterations = 0;  // choice at snr_low
  int to_iterations = 0;    // choice at snr_high
  double snr_low = 0.0;
  double snr_high = 0.0;
};

struct Schedule {
  std::vector<ScheduleEntry> entries;  // ascending SNR
  std::vector<Crossover> crossovers;
};

/// Least-effort iteration scheduling: at every SNR, among the iteration counts
/// whose FER meets `target_fer`, pick the one with the smallest cumulative
/// E[N_en] (fewer iterations on ties); crossovers are the SNR steps where the
/// choice changes.
Schedule least_effort_schedule(std::span<const SimRow> rows, double target_fer, double rate, int q, int mt,
                               double f_clk);

}  // namespace stsd
