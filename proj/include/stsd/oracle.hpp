#pragma once

#include <vector>

#include "stsd/constellation.hpp"
#include "stsd/detector.hpp"
#include "stsd/grid.hpp"
#include "stsd/mimo.hpp"

namespace stsd {

/// Brute-force max-log MAP over all 2^(Q MT) symbol vectors. Unclipped.
/// n_en is reported as the number of vectors visited. Requires Q MT <= 20.
DetectionResult exhaustive_map(const Constellation& constellation, const CVector& y_tilde, const CMatrix& r,
                               const LlrFrame& l_a, double n0);

struct MetricRow {
  int symbol;
  double m_c;
  double m_a;
  double m_p;  // m_c + m_a
};

/// Local increments of every symbol at `level`, with `tail` giving the symbol
/// indices of levels level+1 .. MT-1.
std::vector<MetricRow> metric_table(const Constellation& constellation, const CVector& y_tilde, const CMatrix& r,
                                    const LlrFrame& l_a, double n0, int level, const std::vector<int>& tail);

/// Full-vector path metric of a symbol-index vector.
double path_metric(const Constellation& constellation, const CVector& y_tilde, const CMatrix& r,
                   const LlrFrame& l_a, double n0, const std::vector<int>& symbols);

}  // namespace stsd
