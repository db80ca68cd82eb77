#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wma/ax_tree.hpp"
#include "wma/hungarian.hpp"

namespace wma::testing {

/// Minimum total cost over every injection of the smaller side into the
/// larger one, by exhaustive enumeration.
double brute_force_assignment_cost(const CostMatrix& costs);

/// Ratcliff/Obershelp match count written from the textbook definition with
/// a full common-suffix table; shares no code with the library.
std::size_t reference_matches(std::string_view a, std::string_view b);
double reference_ratio(std::string_view a, std::string_view b);

/// One element change applied by make_edited_tree.
struct TreeEdit {
  enum class Kind { add, remove, rename, property };
  Kind kind = Kind::add;
  std::string role;
  std::string name;
  /// New name for renames.
  std::string new_name;

  bool operator<(const TreeEdit& other) const;
  bool operator==(const TreeEdit& other) const;
};

struct EditedTree {
  std::string before;
  std::string after;
  std::vector<TreeEdit> edits;
};

/// Random tree of at most `max_elements` elements with unique names and up
/// to `max_edits` edits touching distinct elements. Removed and renamed
/// elements never share a role with added or renamed ones, so nearly every
/// edit has one cheapest explanation. Two renames of same-role neighbours can
/// still tie, which is why recovery is measured as a rate.
EditedTree make_edited_tree(std::uint64_t seed, std::size_t max_elements = 40, std::size_t max_edits = 5);

/// Edits implied by a computed delta, in the same vocabulary as TreeEdit.
std::vector<TreeEdit> edits_from_delta(const AxTree& before, const AxTree& after, double match_threshold);

}  // namespace wma::testing
