#include "stsd/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stsd/error.hpp"

namespace stsd {

std::string_view to_string(EnumMode mode) {
  switch (mode) {
    case EnumMode::hybrid: return "hybrid";
    case EnumMode::full_sort_se: return "se-sort";
    case EnumMode::channel_only: return "channel-only";
  }
  return "?";
}

std::optional<EnumMode> parse_enum_mode(std::string_view name) {
  if (name == "hybrid") return EnumMode::hybrid;
  if (name == "se-sort") return EnumMode::full_sort_se;
  if (name == "channel-only") return EnumMode::channel_only;
  return std::nullopt;
}

double apriori_increment(std::span<const double> llr_row, std::span<const int> bits) {
  double m = 0.0;
  for (std::size_t b = 0; b < llr_row.size(); ++b) {
    const int sign = llr_row[b] < 0.0 ? -1 : +1;
    if (bits[b] * sign < 0) m += std::abs(llr_row[b]);
  }
  return m;
}

AprioriTable build_apriori_table(std::span<const double> llr_row) {
  const int q = static_cast<int>(llr_row.size());
  const int n = 1 << q;
  AprioriTable t;
  for (int b = 0; b < q; ++b)
    if (llr_row[b] < 0.0) t.sign_mask |= 1U << b;

  t.metrics.assign(n, 0.0);
  for (int d = 1; d < n; ++d) {
    // Extend the pattern without its lowest set bit.
    const int low = d & -d;
    t.metrics[d] = t.metrics[d ^ low] + std::abs(llr_row[__builtin_ctz(static_cast<unsigned>(low))]);
  }
  t.sorted_order.resize(n);
  std::iota(t.sorted_order.begin(), t.sorted_order.end(), 0);
  std::stable_sort(t.sorted_order.begin(), t.sorted_order.end(),
                   [&](int a, int b) { return t.metrics[a] < t.metrics[b]; });
  return t;
}

std::vector<AprioriTable> build_apriori_tables(const LlrFrame& l_a) {
  std::vector<AprioriTable> out;
  out.reserve(l_a.rows());
  for (int i = 0; i < l_a.rows(); ++i) out.push_back(build_apriori_table(l_a.row(i)));
  return out;
}

double channel_increment(cplx y_i, std::span<const cplx> r_row, std::span<const cplx> tail, cplx cand,
                         double n0, bool normalized) {
  const std::size_t i = r_row.size() - tail.size() - 1;
  cplx e = y_i - r_row[i] * cand;
  for (std::size_t k = 0; k < tail.size(); ++k) e -= r_row[i + 1 + k] * tail[k];
  const double m = sq_abs(e);
  return normalized ? m : m / n0;
}

double clip(double lam_bar, double lambda, double l_e_max) {
  return std::max(lambda - l_e_max, std::min(lambda + l_e_max, lam_bar));
}

// ---------------------------------------------------------------------------
// SearchState

SearchState::SearchState(int mt, int q, double l_e_max)
    : mt_(mt), q_(q), l_e_max_(l_e_max), x_map_(mt, q, +1) {
  apriori_.assign(std::size_t(mt) * q, 0.0);
  lam_bar_.assign(std::size_t(mt) * q, kInf);
  radius_.assign(std::size_t(mt) * q, kInf);
  below_max_.assign(mt + 1, kInf);
}

void SearchState::reset(const LlrFrame& apriori) {
  lambda_ = kInf;
  std::fill(x_map_.values().begin(), x_map_.values().end(), +1);
  std::copy(apriori.values().begin(), apriori.values().end(), apriori_.begin());
  std::fill(lam_bar_.begin(), lam_bar_.end(), kInf);
  refresh_radii();
}

double SearchState::counter_metric(int i, int b) const {
  const std::size_t k = idx(i, b);
  const double ext = lam_bar_[k] - apriori_[k] * x_map_(i, b);
  if (l_e_max_ == kInf || lambda_ == kInf) return ext;
  return clip(ext, lambda_, l_e_max_);
}

void SearchState::refresh_radii() {
  const bool clipped = l_e_max_ != kInf && lambda_ != kInf;
  for (int i = 0; i < mt_; ++i)
    for (int b = 0; b < q_; ++b) {
      const std::size_t k = idx(i, b);
      double r = lam_bar_[k];
      if (clipped) {
        const double a = apriori_[k] * x_map_(i, b);
        const double ext = r - a;
        if (ext > lambda_ + l_e_max_)
          r = a + (lambda_ + l_e_max_);
        else if (ext < lambda_ - l_e_max_)
          r = a + (lambda_ - l_e_max_);
      }
      radius_[k] = r;
    }
  below_max_[0] = -kInf;
  for (int j = 0; j < mt_; ++j) {
    double m = below_max_[j];
    for (int b = 0; b < q_; ++b) m = std::max(m, radius_[idx(j, b)]);
    below_max_[j + 1] = m;
  }
}

bool SearchState::prune_down(int level, double metric, const BitFrame& path) const {
  if (metric < lambda_ || metric < below_max_[level]) return false;
  for (int i = level; i < mt_; ++i)
    for (int b = 0; b < q_; ++b)
      if (path(i, b) != x_map_(i, b) && metric < radius_[idx(i, b)]) return false;
  return true;
}

bool SearchState::prune_sibling(int level, double bound, const BitFrame& path) const {
  if (bound < lambda_ || bound < below_max_[level + 1]) return false;
  for (int i = level + 1; i < mt_; ++i)
    for (int b = 0; b < q_; ++b)
      if (path(i, b) != x_map_(i, b) && bound < radius_[idx(i, b)]) return false;
  return true;
}

void SearchState::leaf_update(double metric, const BitFrame& bits) {
  if (metric < lambda_) {
    // The old MAP becomes the counter-hypothesis of every bit that flips.
    for (int i = 0; i < mt_; ++i)
      for (int b = 0; b < q_; ++b)
        if (bits(i, b) != x_map_(i, b)) {
          double& lb = lam_bar_[idx(i, b)];
          lb = std::min(lb, lambda_);
        }
    lambda_ = metric;
    std::copy(bits.values().begin(), bits.values().end(), x_map_.values().begin());
  } else {
    for (int i = 0; i < mt_; ++i)
      for (int b = 0; b < q_; ++b)
        if (bits(i, b) != x_map_(i, b)) {
          double& lb = lam_bar_[idx(i, b)];
          lb = std::min(lb, metric);
        }
  }
  refresh_radii();
}

LlrFrame SearchState::counter_metrics() const {
  LlrFrame out(mt_, q_);
  for (int i = 0; i < mt_; ++i)
    for (int b = 0; b < q_; ++b) out(i, b) = counter_metric(i, b);
  return out;
}

LlrFrame SearchState::extrinsic_llrs() const {
  LlrFrame out(mt_, q_, 0.0);
  if (lambda_ == kInf) return out;
  for (int i = 0; i < mt_; ++i)
    for (int b = 0; b < q_; ++b) {
      double diff = counter_metric(i, b) - lambda_;
      // (lambda + L) - lambda may round one ulp past L.
      if (l_e_max_ != kInf) diff = std::max(-l_e_max_, std::min(l_e_max_, diff));
      out(i, b) = diff * x_map_(i, b);
    }
  return out;
}

// ---------------------------------------------------------------------------
// SphereDecoder

SphereDecoder::SphereDecoder(Constellation constellation, DetectorConfig config)
    : constellation_(std::move(constellation)), config_(config) {
  if (!(config_.l_e_max > 0.0)) throw Error(ErrorCode::invalid_argument, "l_e_max must be positive");
}

double SphereDecoder::channel_metric(const Level& lv, int symbol) const {
  return lv.weight * sq_abs(lv.center - constellation_.point(symbol));
}

void SphereDecoder::enter_level(int j, const CVector& y_tilde, const CMatrix& r) {
  const int mt = static_cast<int>(levels_.size());
  Level& lv = levels_[j];
  cplx res = y_tilde(j);
  for (int i = j + 1; i < mt; ++i) res -= r(j, i) * constellation_.point(path_[i]);
  const double rjj = r(j, j).real();
  lv.residual = res;
  lv.center = res / rjj;
  lv.flags.clear();
  lv.table.next = 0;

  if (config_.enum_mode == EnumMode::full_sort_se) {
    const int n = constellation_.size();
    std::vector<double> total(n);
    for (int s = 0; s < n; ++s) total[s] = (channel_metric(lv, s) + lv.apriori[s]) + lv.parent;
    lv.sorted.resize(n);
    std::iota(lv.sorted.begin(), lv.sorted.end(), 0);
    std::stable_sort(lv.sorted.begin(), lv.sorted.end(), [&](int a, int b) { return total[a] < total[b]; });
    lv.cursor = 0;
  }
}

std::optional<HybridPick> SphereDecoder::next_candidate(int j) {
  Level& lv = levels_[j];
  auto channel_head = [&](const FlagMask& f) { return constellation_.zigzag_next(lv.center, f); };

  switch (config_.enum_mode) {
    case EnumMode::hybrid: {
      auto apriori_head = [&](const FlagMask& f) -> std::optional<int> {
        auto& t = lv.table;
        while (t.next < t.sorted_order.size()) {
          const int s = constellation_.symbol_of(t.label_of_pattern(t.sorted_order[t.next]));
          if (!f.test(s)) return s;
          ++t.next;
        }
        return std::nullopt;
      };
      return hybrid_next(
          lv.flags, lv.parent, channel_head, apriori_head, [&](int s) { return channel_metric(lv, s); },
          [&](int s) { return lv.apriori[s]; });
    }
    case EnumMode::channel_only: {
      const auto c = channel_head(lv.flags);
      if (!c) return std::nullopt;
      lv.flags.set(*c);
      const double mc = channel_metric(lv, *c);
      // A-priori increments are nonnegative, so the channel part alone bounds
      // every remaining sibling.
      return HybridPick{*c, (mc + lv.apriori[*c]) + lv.parent, (mc + 0.0) + lv.parent};
    }
    case EnumMode::full_sort_se: {
      if (lv.cursor >= lv.sorted.size()) return std::nullopt;
      const int s = lv.sorted[lv.cursor++];
      lv.flags.set(s);
      const double m = (channel_metric(lv, s) + lv.apriori[s]) + lv.parent;
      return HybridPick{s, m, m};
    }
  }
  return std::nullopt;
}

DetectionResult SphereDecoder::detect(const CVector& y_tilde, const CMatrix& r, const LlrFrame& l_a, double n0,
                                      SearchObserver* observer) {
  const int mt = static_cast<int>(r.cols());
  const int q = constellation_.bits_per_symbol();
  const int n = constellation_.size();
  if (mt < 1 || r.rows() != mt || y_tilde.size() != mt)
    throw Error(ErrorCode::invalid_argument, "detect: y_tilde / R dimensions disagree");
  if (l_a.rows() != mt || l_a.cols() != q)
    throw Error(ErrorCode::invalid_argument, "detect: a-priori LLRs must be MT x Q");
  if (!(n0 > 0.0)) throw Error(ErrorCode::invalid_argument, "detect: n0 must be positive");
  for (int j = 0; j < mt; ++j)
    if (!(r(j, j).real() > 0.0)) throw Error(ErrorCode::invalid_argument, "detect: R needs a positive diagonal");

  const bool normalized = config_.use_normalized_metrics;
  const double channel_scale = normalized ? 1.0 : 1.0 / n0;
  const double apriori_scale = normalized ? n0 : 1.0;

  levels_.resize(mt);
  path_.assign(mt, 0);
  path_bits_ = BitFrame(mt, q, +1);
  LlrFrame scaled(mt, q);
  for (int i = 0; i < mt; ++i)
    for (int b = 0; b < q; ++b) scaled(i, b) = l_a(i, b) * apriori_scale;
  state_ = SearchState(mt, q, config_.l_e_max);
  state_.reset(scaled);

  for (int j = 0; j < mt; ++j) {
    Level& lv = levels_[j];
    const double rjj = r(j, j).real();
    lv.weight = channel_scale * rjj * rjj;
    lv.flags = FlagMask(n);
    lv.table = build_apriori_table(l_a.row(j));
    lv.apriori.resize(n);
    for (int s = 0; s < n; ++s)
      lv.apriori[s] = apriori_scale * lv.table.metrics[lv.table.pattern_of_label(constellation_.label_of(s))];
  }

  DetectionResult result;
  std::uint64_t n_en = 0;
  int j = mt - 1;
  levels_[j].parent = 0.0;
  enter_level(j, y_tilde, r);

  while (true) {
    const FlagMask before = levels_[j].flags;
    const auto pick = next_candidate(j);
    if (!pick) {
      if (j == mt - 1) break;
      ++j;
      continue;
    }
    if (config_.node_budget && n_en >= *config_.node_budget) {
      result.completed = false;
      break;
    }
    ++n_en;
    path_[j] = pick->symbol;
    for (int b = 0; b < q; ++b) path_bits_(j, b) = constellation_.bit(pick->symbol, b);

    if (observer)
      observer->on_candidate({j, pick->symbol, pick->metric, pick->bound, levels_[j].parent,
                              std::span<const int>(path_), before});

    if (state_.prune_down(j, pick->metric, path_bits_)) {
      if (state_.prune_sibling(j, pick->bound, path_bits_)) {
        if (j == mt - 1) break;
        ++j;
      }
      continue;
    }
    if (j == 0) {
      state_.leaf_update(pick->metric, path_bits_);
      if (observer) observer->on_leaf_update(state_);
      continue;
    }
    --j;
    levels_[j].parent = pick->metric;
    enter_level(j, y_tilde, r);
  }

  result.n_en = n_en;
  result.lambda_map = state_.lambda();
  result.x_map = state_.x_map();
  result.lam_bar = state_.counter_metrics();
  result.l_e = state_.extrinsic_llrs();
  return result;
}

}  // namespace stsd
