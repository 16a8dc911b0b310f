#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "stsd/constellation.hpp"
#include "stsd/grid.hpp"
#include "stsd/mimo.hpp"

namespace stsd {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class EnumMode {
  hybrid,        // channel zig-zag merged with sorted a-priori list
  full_sort_se,  // exact Schnorr-Euchner order by full sort of M_P (reference)
  channel_only,  // channel zig-zag only, a-priori ignored for ordering
};

std::string_view to_string(EnumMode mode);
std::optional<EnumMode> parse_enum_mode(std::string_view name);

struct DetectorConfig {
  double l_e_max = kInf;
  EnumMode enum_mode = EnumMode::hybrid;
  /// Metrics carry an N0 factor (channel term without 1/N0, a-priori term
  /// times N0). Clipping level and output LLRs are then in the same units.
  bool use_normalized_metrics = false;
  std::optional<std::uint64_t> node_budget;
};

struct DetectionResult {
  LlrFrame l_e;      // extrinsic LLRs
  BitFrame x_map;    // bipolar MAP bits
  LlrFrame lam_bar;  // extrinsic counter-hypothesis metrics, clipped
  double lambda_map = kInf;
  std::uint64_t n_en = 0;
  bool completed = true;
};

/// A-priori symbol metric: sum of |L_b| over bits that disagree with
/// sign(L_b), sign(0) = +1.
double apriori_increment(std::span<const double> llr_row, std::span<const int> bits);

/// All 2^Q a-priori metrics of one antenna, indexed by the sign-relative
/// pattern d (bit b of d set when bit b disagrees with sign(L_b)).
struct AprioriTable {
  std::vector<double> metrics;
  std::vector<int> sorted_order;  // patterns by ascending metric, ties by pattern
  unsigned sign_mask = 0;         // bit b set when L_b < 0
  std::size_t next = 0;           // cursor into sorted_order

  unsigned label_of_pattern(int d) const { return static_cast<unsigned>(d) ^ sign_mask; }
  int pattern_of_label(unsigned label) const { return static_cast<int>(label ^ sign_mask); }
};

AprioriTable build_apriori_table(std::span<const double> llr_row);
std::vector<AprioriTable> build_apriori_tables(const LlrFrame& l_a);

/// (1/N0) |y_i - sum_{j>=i} R_ij s_j|^2 for candidate s_i = cand. `r_row` is the
/// full row i of R; `tail` holds s_{i+1}..s_{MT-1}. With `normalized` the
/// 1/N0 factor is dropped.
double channel_increment(cplx y_i, std::span<const cplx> r_row, std::span<const cplx> tail, cplx cand,
                         double n0, bool normalized);

/// Two-sided clamp of a counter-hypothesis metric into [lambda - L, lambda + L].
double clip(double lam_bar, double lambda, double l_e_max);

struct HybridPick {
  int symbol = -1;
  double metric = 0.0;  // M_P of the selected node
  double bound = 0.0;   // lower bound on M_P of it and every sibling still unflagged
};

/// One hybrid enumeration step on a level. `channel_head(flags)` and
/// `apriori_head(flags)` return the first unflagged symbol of each order,
/// `channel_metric(s)`/`apriori_metric(s)` the local increments. The head with
/// the smaller M_P is taken (channel head on ties) and flagged; the bound is
/// the channel head's channel part plus the a-priori head's a-priori part.
template <class ChannelHead, class AprioriHead, class ChannelMetric, class AprioriMetric>
std::optional<HybridPick> hybrid_next(FlagMask& flags, double parent, ChannelHead&& channel_head,
                                      AprioriHead&& apriori_head, ChannelMetric&& channel_metric,
                                      AprioriMetric&& apriori_metric) {
  const std::optional<int> c = channel_head(static_cast<const FlagMask&>(flags));
  const std::optional<int> a = apriori_head(static_cast<const FlagMask&>(flags));
  if (!c || !a) return std::nullopt;

  const double c_chan = channel_metric(*c);
  const double a_apri = apriori_metric(*a);
  HybridPick pick;
  pick.bound = (c_chan + a_apri) + parent;
  const double c_total = (c_chan + apriori_metric(*c)) + parent;
  if (*c == *a) {
    pick.symbol = *c;
    pick.metric = c_total;
  } else {
    const double a_total = (channel_metric(*a) + a_apri) + parent;
    if (a_total < c_total) {
      pick.symbol = *a;
      pick.metric = a_total;
    } else {
      pick.symbol = *c;
      pick.metric = c_total;
    }
  }
  flags.set(pick.symbol);
  return pick;
}

/// MAP / counter-hypothesis bookkeeping and pruning radii of one search.
///
/// Counter-hypotheses are stored as plain path metrics
/// lam_bar(i,b) = min M_P(s) over visited s with x_ib != x_ib^MAP, unclipped.
/// The extrinsic form is lam_bar - L^A_ib x^MAP_ib, and clipping against the
/// current lambda is applied whenever a value is read.
class SearchState {
 public:
  SearchState() = default;
  SearchState(int mt, int q, double l_e_max);

  /// Start a new search. `apriori` holds L^A in metric units.
  void reset(const LlrFrame& apriori);

  int antennas() const { return mt_; }
  int bits() const { return q_; }
  double l_e_max() const { return l_e_max_; }
  double lambda() const { return lambda_; }
  const BitFrame& x_map() const { return x_map_; }
  double lam_bar(int i, int b) const { return lam_bar_[idx(i, b)]; }

  /// Clipped extrinsic counter-hypothesis metric.
  double counter_metric(int i, int b) const;
  /// Clipped path-metric radius entry used by the pruning checks.
  double radius(int i, int b) const { return radius_[idx(i, b)]; }

  /// Node on `level` with path metric `metric`; `path` must hold the bits of
  /// levels >= `level`. True means the node and its sub-tree are pruned.
  bool prune_down(int level, double metric, const BitFrame& path) const;
  /// Lower bound on the remaining siblings on `level`; `path` needs levels
  /// > `level`. True means enumeration on the level stops.
  bool prune_sibling(int level, double bound, const BitFrame& path) const;

  void leaf_update(double metric, const BitFrame& bits);

  LlrFrame counter_metrics() const;
  LlrFrame extrinsic_llrs() const;

 private:
  std::size_t idx(int i, int b) const { return std::size_t(i) * q_ + b; }
  void refresh_radii();

  int mt_ = 0;
  int q_ = 0;
  double l_e_max_ = kInf;
  double lambda_ = kInf;
  BitFrame x_map_;
  std::vector<double> apriori_;
  std::vector<double> lam_bar_;
  std::vector<double> radius_;
  std::vector<double> below_max_;  // below_max_[j] = max radius over levels < j
};

struct CandidateEvent {
  int level = 0;
  int symbol = 0;
  double metric = 0.0;
  double bound = 0.0;
  double parent_metric = 0.0;
  std::span<const int> path;  // symbol index per level, valid above `level`
  FlagMask flags_before;
};

/// Test and instrumentation hooks into a running search.
class SearchObserver {
 public:
  virtual ~SearchObserver() = default;
  virtual void on_candidate(const CandidateEvent&) {}
  virtual void on_leaf_update(const SearchState&) {}
};

/// SISO single tree-search sphere decoder. Not thread-safe: one instance
/// per concurrent search.
class SphereDecoder {
 public:
  SphereDecoder(Constellation constellation, DetectorConfig config);

  const Constellation& constellation() const { return constellation_; }
  const DetectorConfig& config() const { return config_; }

  /// Depth-first search over y_tilde = r s + n. `l_a` is MT x Q.
  DetectionResult detect(const CVector& y_tilde, const CMatrix& r, const LlrFrame& l_a, double n0,
                         SearchObserver* observer = nullptr);

 private:
  struct Level {
    cplx residual;     // y_j - sum_{i>j} R_ji s_i
    cplx center;       // residual / R_jj
    double weight;     // channel metric scale times R_jj^2
    double parent;     // M_P of the path above
    FlagMask flags;
    std::vector<double> apriori;  // a-priori increment by symbol index
    AprioriTable table;
    std::vector<int> sorted;      // full-sort order
    std::size_t cursor = 0;
  };

  void enter_level(int j, const CVector& y_tilde, const CMatrix& r);
  std::optional<HybridPick> next_candidate(int j);
  double channel_metric(const Level& lv, int symbol) const;

  Constellation constellation_;
  DetectorConfig config_;
  std::vector<Level> levels_;
  std::vector<int> path_;
  BitFrame path_bits_;
  SearchState state_;
};

}  // namespace stsd
