#include "wma/hungarian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wma/error.hpp"

namespace wma {

CostMatrix::CostMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) throw InvalidArgument("cost matrix rows must have equal length");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

double CostMatrix::max_value() const noexcept {
  if (data_.empty()) return 0.0;
  return *std::max_element(data_.begin(), data_.end());
}

double Matching::total_cost() const noexcept {
  double total = 0.0;
  for (const MatchedPair& pair : pairs) total += pair.cost;
  return total;
}

Matching solve_assignment(const CostMatrix& costs, std::optional<double> dummy_cost) {
  const std::size_t n = costs.rows();
  const std::size_t m = costs.cols();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      if (!std::isfinite(costs(r, c))) {
        throw NonFiniteCost("cost[" + std::to_string(r) + "][" + std::to_string(c) + "] is not finite");
      }
    }
  }
  const double pad = dummy_cost.value_or(costs.max_value() + 1.0);
  if (!std::isfinite(pad)) throw NonFiniteCost("dummy cost is not finite");

  Matching result;
  if (n == 0 || m == 0) {
    for (std::size_t r = 0; r < n; ++r) result.unmatched_old.push_back(r);
    for (std::size_t c = 0; c < m; ++c) result.unmatched_new.push_back(c);
    return result;
  }

  const std::size_t size = std::max(n, m);
  auto cost = [&](std::size_t r, std::size_t c) { return r < n && c < m ? costs(r, c) : pad; };

  // 1-based potentials formulation; column 0 is the virtual root.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(size + 1, 0.0);
  std::vector<double> v(size + 1, 0.0);
  std::vector<std::size_t> row_of(size + 1, 0);  // column -> assigned row
  std::vector<std::size_t> way(size + 1, 0);
  for (std::size_t i = 1; i <= size; ++i) {
    row_of[0] = i;
    std::size_t j0 = 0;
    std::vector<double> min_slack(size + 1, kInf);
    std::vector<bool> used(size + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = row_of[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= size; ++j) {
        if (used[j]) continue;
        const double slack = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (slack < min_slack[j]) {
          min_slack[j] = slack;
          way[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= size; ++j) {
        if (used[j]) {
          u[row_of[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      row_of[j0] = row_of[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> col_of_row(size, size);
  for (std::size_t j = 1; j <= size; ++j) col_of_row[row_of[j] - 1] = j - 1;

  std::vector<bool> column_used(m, false);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t c = col_of_row[r];
    if (c < m) {
      result.pairs.push_back({r, c, costs(r, c)});
      column_used[c] = true;
    } else {
      result.unmatched_old.push_back(r);
    }
  }
  for (std::size_t c = 0; c < m; ++c) {
    if (!column_used[c]) result.unmatched_new.push_back(c);
  }
  return result;
}

}  // namespace wma
