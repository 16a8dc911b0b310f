#include "stsd/oracle.hpp"

#include <cmath>

#include "stsd/error.hpp"

namespace stsd {

namespace {

// -log P(s) approximation written as (|L| - L x) / 2 per bit.
double symbol_prior(const Constellation& c, std::span<const double> llr, int symbol) {
  double m = 0.0;
  for (int b = 0; b < c.bits_per_symbol(); ++b) m += 0.5 * (std::abs(llr[b]) - llr[b] * c.bit(symbol, b));
  return m;
}

double residual_energy(const Constellation& c, const CVector& y_tilde, const CMatrix& r, int level,
                       const std::vector<int>& symbols) {
  const int mt = static_cast<int>(r.cols());
  double re = y_tilde(level).real();
  double im = y_tilde(level).imag();
  for (int j = level; j < mt; ++j) {
    const cplx p = c.point(symbols[j]);
    const cplx rij = r(level, j);
    re -= rij.real() * p.real() - rij.imag() * p.imag();
    im -= rij.real() * p.imag() + rij.imag() * p.real();
  }
  return re * re + im * im;
}

}  // namespace

double path_metric(const Constellation& c, const CVector& y_tilde, const CMatrix& r, const LlrFrame& l_a,
                   double n0, const std::vector<int>& symbols) {
  double m = 0.0;
  for (int i = 0; i < static_cast<int>(r.cols()); ++i)
    m += residual_energy(c, y_tilde, r, i, symbols) / n0 + symbol_prior(c, l_a.row(i), symbols[i]);
  return m;
}

DetectionResult exhaustive_map(const Constellation& c, const CVector& y_tilde, const CMatrix& r,
                               const LlrFrame& l_a, double n0) {
  const int mt = static_cast<int>(r.cols());
  const int q = c.bits_per_symbol();
  if (q * mt > 20) throw Error(ErrorCode::too_large, "exhaustive_map: Q * MT must not exceed 20");
  const int n = c.size();

  std::size_t total = 1;
  for (int i = 0; i < mt; ++i) total *= static_cast<std::size_t>(n);

  // best[i][b][v]: minimum metric over vectors whose bit (i,b) has label value v.
  std::vector<double> best(std::size_t(mt) * q * 2, kInf);
  std::vector<int> symbols(mt, 0);
  std::vector<int> map_symbols(mt, 0);
  double lambda = kInf;

  for (std::size_t v = 0; v < total; ++v) {
    std::size_t rem = v;
    for (int i = 0; i < mt; ++i) {
      symbols[i] = static_cast<int>(rem % n);
      rem /= n;
    }
    const double m = path_metric(c, y_tilde, r, l_a, n0, symbols);
    if (m < lambda) {
      lambda = m;
      map_symbols = symbols;
    }
    for (int i = 0; i < mt; ++i) {
      const unsigned label = c.label_of(symbols[i]);
      for (int b = 0; b < q; ++b) {
        double& slot = best[(std::size_t(i) * q + b) * 2 + ((label >> b) & 1U)];
        if (m < slot) slot = m;
      }
    }
  }

  DetectionResult out;
  out.lambda_map = lambda;
  out.n_en = total;
  out.completed = true;
  out.x_map = BitFrame(mt, q);
  out.lam_bar = LlrFrame(mt, q);
  out.l_e = LlrFrame(mt, q);
  for (int i = 0; i < mt; ++i)
    for (int b = 0; b < q; ++b) {
      const int x = c.bit(map_symbols[i], b);
      const unsigned counter_value = x > 0 ? 1U : 0U;
      const double counter = best[(std::size_t(i) * q + b) * 2 + counter_value];
      out.x_map(i, b) = x;
      out.lam_bar(i, b) = counter - l_a(i, b) * x;
      out.l_e(i, b) = (out.lam_bar(i, b) - lambda) * x;
    }
  return out;
}

std::vector<MetricRow> metric_table(const Constellation& c, const CVector& y_tilde, const CMatrix& r,
                                    const LlrFrame& l_a, double n0, int level, const std::vector<int>& tail) {
  const int mt = static_cast<int>(r.cols());
  if (level < 0 || level >= mt || static_cast<int>(tail.size()) != mt - level - 1)
    throw Error(ErrorCode::invalid_argument, "metric_table: bad level or tail");
  std::vector<int> symbols(mt, 0);
  for (int k = 0; k < static_cast<int>(tail.size()); ++k) symbols[level + 1 + k] = tail[k];

  std::vector<MetricRow> rows;
  rows.reserve(c.size());
  for (int s = 0; s < c.size(); ++s) {
    symbols[level] = s;
    MetricRow row{};
    row.symbol = s;
    row.m_c = residual_energy(c, y_tilde, r, level, symbols) / n0;
    row.m_a = symbol_prior(c, l_a.row(level), s);
    row.m_p = row.m_c + row.m_a;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace stsd
