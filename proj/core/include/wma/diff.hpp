#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wma/ax_tree.hpp"
#include "wma/hungarian.hpp"

namespace wma {

/// How Algorithm-1 style transition extraction builds its unmatched set U.
enum class TaoMode {
  /// U = columns left unassigned by the Hungarian solution (the literal
  /// definition; non-empty only when the new observation is larger).
  strict,
  /// U additionally holds matched columns whose cost exceeds
  /// match_threshold, so in-place changes count as unmatched.
  threshold,
};

/// Weights and limits for element matching. Every field can be overridden
/// from configuration; none of the defaults come from measured data.
struct MatchWeights {
  double w_name = 1.0;
  double w_role = 1.0;
  double w_loc = 0.01;
  /// Size gate: matching runs only when |new| <= tau * |old|.
  double tau = 2.0;
  /// Neighbours are added to the TaO state only when |U| <= x_limit ...
  std::size_t x_limit = 10;
  /// ... and only within this index distance of an unmatched element.
  std::size_t y_limit = 2;
  /// Matched pairs costing more than this are treated as delete + add.
  double match_threshold = 0.5;
  /// Padding cost for rectangular problems. When unset:
  /// w_name + w_role + w_loc * max|l_i - l_j| + 1.
  std::optional<double> dummy_cost;
  TaoMode tao_mode = TaoMode::threshold;
  /// Reproduce the printed cost form, which charges weight on equality of
  /// name and role instead of on mismatch. Only useful for audits: under
  /// argmin it prefers pairing unlike elements.
  bool printed_sign = false;

  /// Throws InvalidArgument for negative weights or non-positive tau.
  void validate() const;
};

/// Location measure l_i used by the cost model. Defaults to line_index.
using LocationMeasure = std::function<double(const AxElement&)>;

double line_index_location(const AxElement& element);

/// C[i][j] = w_name*[name_i != name_j] + w_role*[role_i != role_j]
///         + w_loc*|l_i - l_j|.
/// Throws EmptyObservation when either side is empty.
CostMatrix build_cost_matrix(const std::vector<AxElement>& old_elements,
                             const std::vector<AxElement>& new_elements,
                             const MatchWeights& weights,
                             const LocationMeasure& location = line_index_location);

/// Padding cost used for the given element lists.
double default_dummy_cost(const std::vector<AxElement>& old_elements,
                          const std::vector<AxElement>& new_elements,
                          const MatchWeights& weights,
                          const LocationMeasure& location = line_index_location);

/// An element that kept its identity but changed observable fields.
struct UpdatedElement {
  AxElement old_element;
  AxElement new_element;
  /// Subset of {"name", "role", "properties"}, in that order.
  std::vector<std::string> changed_fields;

  bool operator==(const UpdatedElement&) const = default;
};

/// Classified difference between consecutive observations. Added elements
/// are ordered by their new line_index, deleted by old line_index, updated by
/// new line_index.
struct TransitionDelta {
  std::vector<AxElement> added;
  std::vector<AxElement> deleted;
  std::vector<UpdatedElement> updated;
  std::size_t unchanged_count = 0;

  bool empty() const noexcept { return added.empty() && deleted.empty() && updated.empty(); }
  bool operator==(const TransitionDelta&) const = default;
};

/// Matches the elements of two observations and buckets them into ADDED,
/// DELETED, UPDATED and unchanged. Location and depth shifts alone do not
/// make an element updated; element ids are ignored because backends may
/// renumber them between loads.
TransitionDelta compute_delta(const AxTree& before, const AxTree& after, const MatchWeights& weights,
                              const LocationMeasure& location = line_index_location);

/// Which branch produced a TaO state.
enum class TaoBranch { size_gate, no_unmatched, too_many_unmatched, focused };

struct TaoResult {
  std::vector<AxElement> elements;
  /// Indices into the new observation's element list (the set U).
  std::vector<std::size_t> unmatched;
  TaoBranch branch = TaoBranch::focused;
};

/// Transition-aware observation: the unmatched new elements plus, when few,
/// their neighbours within y_limit positions; the full new observation when
/// the size gate fails, nothing is unmatched, or too much is unmatched.
///
/// "Too much" is |U| >= m - n in strict mode, and |U| >= m (every new
/// element changed) in threshold mode.
TaoResult tao_state_detail(const AxTree& before, const AxTree& after, const MatchWeights& weights,
                           const LocationMeasure& location = line_index_location);

std::vector<AxElement> tao_state(const AxTree& before, const AxTree& after, const MatchWeights& weights,
                                 const LocationMeasure& location = line_index_location);

}  // namespace wma
