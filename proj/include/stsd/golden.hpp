#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stsd/detector.hpp"
#include "stsd/grid.hpp"
#include "stsd/mimo.hpp"
#include "stsd/sim.hpp"

namespace stsd {

/// One detector regression vector: inputs and the expected search outcome.
struct GoldenRecord {
  std::uint64_t seed = 0;
  int q = 2;
  double n0 = 1.0;
  double l_e_max = kInf;
  EnumMode enum_mode = EnumMode::hybrid;
  CVector y_tilde;
  CMatrix r;
  LlrFrame l_a;

  double lambda_map = kInf;
  BitFrame x_map;
  LlrFrame l_e;
  std::uint64_t n_en = 0;
};

struct GoldenSet {
  QrdMode qrd_mode = QrdMode::sqrd;
  std::vector<GoldenRecord> records;
};

/// Regenerates the built-in instance set (fixed seeds, mixed sizes, clipping
/// levels and enumeration modes) preprocessed with `mode`.
GoldenSet make_golden_set(QrdMode mode);

/// Line-oriented text, full double precision.
void write_golden(const std::filesystem::path& path, const GoldenSet& set);
GoldenSet read_golden(const std::filesystem::path& path);

struct GoldenCheck {
  bool ok = true;
  std::size_t records = 0;
  std::string report;  // first divergence, empty when ok
};

/// Re-runs every record's inputs through the detector and compares lambda and
/// L^E within `tolerance` (absolute), x^MAP and N_en exactly.
GoldenCheck check_golden(const GoldenSet& set, double tolerance = 1e-9);

}  // namespace stsd
