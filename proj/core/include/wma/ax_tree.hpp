#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wma {

/// A `key: value` property trailing an element line, e.g. `focused: True`.
/// Text that does not follow the `key:` shape is kept with an empty key.
struct Property {
  std::string key;
  std::string value;

  bool operator==(const Property&) const = default;
};

/// One element line of an accessibility tree:
///
///     <indent>[<elem_id>] <role> '<name>' [key: value ...]
///
/// `line_index` is the element's 0-based position among the elements of its
/// observation. It is the default location measure for element matching.
struct AxElement {
  std::int64_t elem_id = 0;
  std::string role;
  std::string name;
  std::size_t depth = 0;
  std::size_t line_index = 0;
  std::vector<Property> extra;

  bool operator==(const AxElement&) const = default;
};

/// A source line that is not an element (tab headers, blank lines, ...).
/// `position` is the number of elements that precede it.
struct InertLine {
  std::size_t position = 0;
  std::string text;

  bool operator==(const InertLine&) const = default;
};

/// A parsed observation. Elements are kept in document order.
struct AxTree {
  std::vector<AxElement> elements;
  std::vector<InertLine> inert;
  std::string source_text;
  std::string url;

  std::size_t size() const noexcept { return elements.size(); }
  bool empty() const noexcept { return elements.empty(); }

  /// First element carrying `elem_id`, or nullptr.
  const AxElement* find(std::int64_t elem_id) const noexcept;
  /// First element with the given role and name, or nullptr.
  const AxElement* find(std::string_view role, std::string_view name) const noexcept;
};

struct ParseOptions {
  /// Indentation unit, e.g. "\t" or "  ". Autodetected from the first
  /// indented line when unset.
  std::optional<std::string> indent_unit;
};

/// Parses WebArena-style accessibility-tree text. Lines whose first
/// non-blank character is `[` are element lines; a non-integer id raises
/// MalformedLine. All other lines are preserved as inert lines.
AxTree parse_axtree(std::string_view text, const ParseOptions& options = {});

/// Renders one element line without indentation.
std::string render_element(const AxElement& element);

/// Renders a tree back to text, one line per element or inert line.
std::string render_axtree(const AxTree& tree, std::string_view indent_unit = "\t");

/// Collapses every whitespace run to one space and trims both ends.
std::string normalize_whitespace(std::string_view text);

}  // namespace wma
