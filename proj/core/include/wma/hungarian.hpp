#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <vector>

namespace wma {

/// Dense row-major matrix of assignment costs.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  CostMatrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double max_value() const noexcept;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct MatchedPair {
  std::size_t old_index = 0;
  std::size_t new_index = 0;
  double cost = 0.0;

  bool operator==(const MatchedPair&) const = default;
};

/// Result of an assignment. `pairs` is sorted by old_index; the unmatched
/// index lists are sorted ascending. Together they partition both sides.
struct Matching {
  std::vector<MatchedPair> pairs;
  std::vector<std::size_t> unmatched_old;
  std::vector<std::size_t> unmatched_new;

  /// Sum of pair costs in old_index order.
  double total_cost() const noexcept;
};

/// Minimum-cost assignment (Kuhn-Munkres with potentials, O(n^3)).
///
/// Rectangular input is padded to a square with `dummy_cost` entries; rows or
/// columns assigned to padding are reported as unmatched. Since every square
/// assignment uses the same number of padding cells, the padding value never
/// changes which real pairs are optimal. Defaults to max(C) + 1.
///
/// Throws NonFiniteCost for NaN or infinite entries.
Matching solve_assignment(const CostMatrix& costs, std::optional<double> dummy_cost = std::nullopt);

}  // namespace wma
