#pragma once

#include <span>
#include <vector>

namespace stsd {

/// Dense row-major (antenna x bit) table.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, T init = T{}) : rows_(rows), cols_(cols), data_(std::size_t(rows) * cols, init) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  T& operator()(int i, int b) { return data_[std::size_t(i) * cols_ + b]; }
  const T& operator()(int i, int b) const { return data_[std::size_t(i) * cols_ + b]; }

  std::span<T> row(int i) { return {data_.data() + std::size_t(i) * cols_, std::size_t(cols_)}; }
  std::span<const T> row(int i) const { return {data_.data() + std::size_t(i) * cols_, std::size_t(cols_)}; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  bool operator==(const Grid&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

/// Per-antenna, per-bit LLRs. Positive favours bit value x = +1 (label bit 0).
using LlrFrame = Grid<double>;
/// Per-antenna, per-bit bipolar bits (+1 / -1).
using BitFrame = Grid<int>;

}  // namespace stsd
