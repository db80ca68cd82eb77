#include "wma/diff.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "wma/error.hpp"

namespace wma {

void MatchWeights::validate() const {
  if (w_name < 0 || w_role < 0 || w_loc < 0) throw InvalidArgument("match weights must be non-negative");
  if (!(tau > 0)) throw InvalidArgument("tau must be positive");
  if (match_threshold < 0) throw InvalidArgument("match_threshold must be non-negative");
  if (dummy_cost && *dummy_cost < 0) throw InvalidArgument("dummy_cost must be non-negative");
}

double line_index_location(const AxElement& element) { return static_cast<double>(element.line_index); }

CostMatrix build_cost_matrix(const std::vector<AxElement>& old_elements,
                             const std::vector<AxElement>& new_elements, const MatchWeights& weights,
                             const LocationMeasure& location) {
  if (old_elements.empty() || new_elements.empty()) {
    throw EmptyObservation("cannot build a cost matrix against an empty observation");
  }
  weights.validate();
  CostMatrix costs(old_elements.size(), new_elements.size());
  for (std::size_t i = 0; i < old_elements.size(); ++i) {
    const AxElement& a = old_elements[i];
    const double la = location(a);
    for (std::size_t j = 0; j < new_elements.size(); ++j) {
      const AxElement& b = new_elements[j];
      const bool name_term = weights.printed_sign ? a.name == b.name : a.name != b.name;
      const bool role_term = weights.printed_sign ? a.role == b.role : a.role != b.role;
      costs(i, j) = weights.w_name * (name_term ? 1.0 : 0.0) + weights.w_role * (role_term ? 1.0 : 0.0) +
                    weights.w_loc * std::abs(la - location(b));
    }
  }
  return costs;
}

double default_dummy_cost(const std::vector<AxElement>& old_elements,
                          const std::vector<AxElement>& new_elements, const MatchWeights& weights,
                          const LocationMeasure& location) {
  if (weights.dummy_cost) return *weights.dummy_cost;
  double max_shift = 0.0;
  if (!old_elements.empty() && !new_elements.empty()) {
    auto [old_lo, old_hi] = std::minmax_element(old_elements.begin(), old_elements.end(),
                                                [&](const auto& x, const auto& y) { return location(x) < location(y); });
    auto [new_lo, new_hi] = std::minmax_element(new_elements.begin(), new_elements.end(),
                                                [&](const auto& x, const auto& y) { return location(x) < location(y); });
    max_shift = std::max(std::abs(location(*old_hi) - location(*new_lo)),
                         std::abs(location(*new_hi) - location(*old_lo)));
  }
  return weights.w_name + weights.w_role + weights.w_loc * max_shift + 1.0;
}

namespace {

std::vector<std::string> changed_fields(const AxElement& a, const AxElement& b) {
  std::vector<std::string> fields;
  if (a.name != b.name) fields.emplace_back("name");
  if (a.role != b.role) fields.emplace_back("role");
  if (a.extra != b.extra) fields.emplace_back("properties");
  return fields;
}

Matching match_elements(const AxTree& before, const AxTree& after, const MatchWeights& weights,
                        const LocationMeasure& location, CostMatrix& costs) {
  costs = build_cost_matrix(before.elements, after.elements, weights, location);
  return solve_assignment(costs, default_dummy_cost(before.elements, after.elements, weights, location));
}

}  // namespace

TransitionDelta compute_delta(const AxTree& before, const AxTree& after, const MatchWeights& weights,
                              const LocationMeasure& location) {
  weights.validate();
  TransitionDelta delta;
  if (before.empty() || after.empty()) {
    delta.deleted = before.elements;
    delta.added = after.elements;
    return delta;
  }

  CostMatrix costs;
  const Matching matching = match_elements(before, after, weights, location, costs);
  std::vector<std::size_t> added = matching.unmatched_new;
  std::vector<std::size_t> deleted = matching.unmatched_old;
  std::vector<std::pair<std::size_t, std::size_t>> updated;
  for (const MatchedPair& pair : matching.pairs) {
    if (pair.cost > weights.match_threshold) {
      added.push_back(pair.new_index);
      deleted.push_back(pair.old_index);
      continue;
    }
    const AxElement& a = before.elements[pair.old_index];
    const AxElement& b = after.elements[pair.new_index];
    if (changed_fields(a, b).empty()) {
      ++delta.unchanged_count;
    } else {
      updated.emplace_back(pair.old_index, pair.new_index);
    }
  }

  std::sort(added.begin(), added.end());
  std::sort(deleted.begin(), deleted.end());
  std::sort(updated.begin(), updated.end(), [](const auto& x, const auto& y) { return x.second < y.second; });
  for (std::size_t j : added) delta.added.push_back(after.elements[j]);
  for (std::size_t i : deleted) delta.deleted.push_back(before.elements[i]);
  for (const auto& [i, j] : updated) {
    const AxElement& a = before.elements[i];
    const AxElement& b = after.elements[j];
    delta.updated.push_back({a, b, changed_fields(a, b)});
  }
  return delta;
}

TaoResult tao_state_detail(const AxTree& before, const AxTree& after, const MatchWeights& weights,
                           const LocationMeasure& location) {
  weights.validate();
  const std::size_t n = before.size();
  const std::size_t m = after.size();
  TaoResult result;

  auto full = [&](TaoBranch branch) {
    result.elements = after.elements;
    result.branch = branch;
    return result;
  };

  if (static_cast<double>(m) > weights.tau * static_cast<double>(n)) return full(TaoBranch::size_gate);

  std::vector<std::size_t>& unmatched = result.unmatched;
  if (n == 0 || m == 0) {
    for (std::size_t j = 0; j < m; ++j) unmatched.push_back(j);
  } else {
    CostMatrix costs;
    const Matching matching = match_elements(before, after, weights, location, costs);
    unmatched = matching.unmatched_new;
    if (weights.tao_mode == TaoMode::threshold) {
      for (const MatchedPair& pair : matching.pairs) {
        if (pair.cost > weights.match_threshold) unmatched.push_back(pair.new_index);
      }
      std::sort(unmatched.begin(), unmatched.end());
    }
  }

  if (unmatched.empty()) return full(TaoBranch::no_unmatched);
  const std::size_t growth = m > n ? m - n : 0;
  const bool too_many = weights.tao_mode == TaoMode::strict ? unmatched.size() >= growth : unmatched.size() >= m;
  if (too_many) return full(TaoBranch::too_many_unmatched);

  const bool with_neighbours = unmatched.size() <= weights.x_limit;
  for (std::size_t j = 0; j < m; ++j) {
    bool keep = std::binary_search(unmatched.begin(), unmatched.end(), j);
    if (!keep && with_neighbours) {
      for (std::size_t u : unmatched) {
        const std::size_t distance = u > j ? u - j : j - u;
        if (distance <= weights.y_limit) {
          keep = true;
          break;
        }
      }
    }
    if (keep) result.elements.push_back(after.elements[j]);
  }
  result.branch = TaoBranch::focused;
  return result;
}

std::vector<AxElement> tao_state(const AxTree& before, const AxTree& after, const MatchWeights& weights,
                                 const LocationMeasure& location) {
  return tao_state_detail(before, after, weights, location).elements;
}

}  // namespace wma
