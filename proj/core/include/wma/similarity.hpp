#pragma once

#include <cstddef>
#include <string_view>

namespace wma {

/// Number of characters matched by the Ratcliff/Obershelp procedure: find
/// the longest common substring (earliest in `a`, then earliest in `b` on
/// ties), then recurse on the pieces left and right of it.
std::size_t matching_characters(std::string_view a, std::string_view b);

/// Ratcliff/Obershelp similarity 2M / (|a| + |b|), the quantity
/// difflib.SequenceMatcher(None, a, b, autojunk=False).ratio() reports.
/// Two empty strings have ratio 1.0.
double similarity_ratio(std::string_view a, std::string_view b);

}  // namespace wma
