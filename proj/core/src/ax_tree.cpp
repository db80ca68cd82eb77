#include "wma/ax_tree.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "wma/error.hpp"

namespace wma {
namespace {

struct IndentUnit {
  char ch = '\t';
  std::size_t width = 1;
};

bool is_blank(char c) { return c == ' ' || c == '\t'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

bool is_element_line(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && is_blank(line[i])) ++i;
  return i < line.size() && line[i] == '[';
}

IndentUnit detect_indent(const std::vector<std::string_view>& lines, const ParseOptions& options) {
  if (options.indent_unit) {
    const std::string& unit = *options.indent_unit;
    if (unit.empty() || !std::all_of(unit.begin(), unit.end(), [&](char c) { return c == unit[0]; }) ||
        !is_blank(unit[0])) {
      throw InvalidArgument("indent unit must be a non-empty run of one whitespace character");
    }
    return {unit[0], unit.size()};
  }
  for (std::string_view line : lines) {
    if (!is_element_line(line) || line.empty() || !is_blank(line[0])) continue;
    IndentUnit unit{line[0], 0};
    while (unit.width < line.size() && line[unit.width] == unit.ch) ++unit.width;
    return unit;
  }
  return {};
}

bool is_key_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_key_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

// Length of the `key:` token starting at `pos`, or 0 when there is none.
std::size_t key_token_length(std::string_view s, std::size_t pos) {
  if (pos > 0 && s[pos - 1] != ' ') return 0;
  if (!is_key_start(s[pos])) return 0;
  std::size_t end = pos + 1;
  while (end < s.size() && is_key_char(s[end])) ++end;
  if (end >= s.size() || s[end] != ':') return 0;
  if (end + 1 < s.size() && s[end + 1] != ' ') return 0;
  return end + 1 - pos;
}

std::vector<Property> parse_properties(std::string_view text) {
  std::vector<Property> props;
  const std::string_view s = trim(text);
  if (s.empty()) return props;

  std::vector<std::pair<std::size_t, std::size_t>> keys;  // (pos, token length)
  for (std::size_t pos = 0; pos < s.size(); ++pos) {
    if (std::size_t len = key_token_length(s, pos); len > 0) {
      keys.emplace_back(pos, len);
      pos += len - 1;
    }
  }
  const std::size_t first = keys.empty() ? s.size() : keys.front().first;
  if (first > 0) props.push_back({"", std::string(trim(s.substr(0, first)))});
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const auto [pos, len] = keys[k];
    const std::size_t value_end = k + 1 < keys.size() ? keys[k + 1].first : s.size();
    props.push_back({std::string(s.substr(pos, len - 1)),
                     std::string(trim(s.substr(pos + len, value_end - pos - len)))});
  }
  return props;
}

AxElement parse_element(std::string_view body, std::size_t line_number) {
  // body starts at '['
  const std::size_t close = body.find(']');
  if (close == std::string_view::npos) throw MalformedLine(line_number, "missing ']' after element id");
  const std::string_view id_text = body.substr(1, close - 1);
  AxElement element;
  if (id_text.empty() || !std::all_of(id_text.begin(), id_text.end(),
                                      [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    throw MalformedLine(line_number, "element id '" + std::string(id_text) + "' is not a non-negative integer");
  }
  const auto [ptr, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), element.elem_id);
  if (ec != std::errc{} || ptr != id_text.data() + id_text.size()) {
    throw MalformedLine(line_number, "element id '" + std::string(id_text) + "' is out of range");
  }

  std::string_view rest = body.substr(close + 1);
  while (!rest.empty() && is_blank(rest.front())) rest.remove_prefix(1);
  std::size_t role_end = 0;
  while (role_end < rest.size() && !is_blank(rest[role_end])) ++role_end;
  if (role_end == 0) throw MalformedLine(line_number, "missing role");
  element.role = std::string(rest.substr(0, role_end));
  rest.remove_prefix(role_end);
  while (!rest.empty() && is_blank(rest.front())) rest.remove_prefix(1);

  std::string_view props_text = rest;
  if (!rest.empty() && rest.front() == '\'') {
    const std::size_t last_quote = rest.rfind('\'');
    if (last_quote == 0) {
      element.name = std::string(rest.substr(1));
      props_text = {};
    } else {
      element.name = std::string(rest.substr(1, last_quote - 1));
      props_text = rest.substr(last_quote + 1);
    }
  }
  element.extra = parse_properties(props_text);
  return element;
}

}  // namespace

const AxElement* AxTree::find(std::int64_t elem_id) const noexcept {
  auto it = std::find_if(elements.begin(), elements.end(),
                         [&](const AxElement& e) { return e.elem_id == elem_id; });
  return it == elements.end() ? nullptr : &*it;
}

const AxElement* AxTree::find(std::string_view role, std::string_view name) const noexcept {
  auto it = std::find_if(elements.begin(), elements.end(),
                         [&](const AxElement& e) { return e.role == role && e.name == name; });
  return it == elements.end() ? nullptr : &*it;
}

AxTree parse_axtree(std::string_view text, const ParseOptions& options) {
  AxTree tree;
  tree.source_text = std::string(text);
  const auto lines = split_lines(text);
  const IndentUnit unit = detect_indent(lines, options);

  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::string_view line = lines[n];
    if (!is_element_line(line)) {
      tree.inert.push_back({tree.elements.size(), std::string(line)});
      continue;
    }
    std::size_t lead = 0;
    std::size_t unit_chars = 0;
    while (lead < line.size() && is_blank(line[lead])) {
      if (line[lead] == unit.ch) ++unit_chars;
      ++lead;
    }
    AxElement element = parse_element(line.substr(lead), n + 1);
    const std::size_t raw_depth = unit_chars / unit.width;
    element.depth = tree.elements.empty() ? 0 : std::min(raw_depth, tree.elements.back().depth + 1);
    element.line_index = tree.elements.size();
    tree.elements.push_back(std::move(element));
  }
  return tree;
}

std::string render_element(const AxElement& element) {
  std::string out = "[" + std::to_string(element.elem_id) + "] " + element.role + " '" + element.name + "'";
  for (const Property& prop : element.extra) {
    out += ' ';
    if (prop.key.empty()) {
      out += prop.value;
    } else {
      out += prop.key + ":";
      if (!prop.value.empty()) out += " " + prop.value;
    }
  }
  return out;
}

std::string render_axtree(const AxTree& tree, std::string_view indent_unit) {
  std::string out;
  std::size_t inert = 0;
  auto flush_inert = [&](std::size_t position) {
    while (inert < tree.inert.size() && tree.inert[inert].position <= position) {
      out += tree.inert[inert].text;
      out += '\n';
      ++inert;
    }
  };
  for (std::size_t i = 0; i < tree.elements.size(); ++i) {
    flush_inert(i);
    const AxElement& element = tree.elements[i];
    for (std::size_t d = 0; d < element.depth; ++d) out += indent_unit;
    out += render_element(element);
    out += '\n';
  }
  flush_inert(tree.elements.size());
  return out;
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

}  // namespace wma
