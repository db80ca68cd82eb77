#include "oracles.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <tuple>

#include "wma/diff.hpp"

namespace wma::testing {

double brute_force_assignment_cost(const CostMatrix& costs) {
  const bool transpose = costs.rows() > costs.cols();
  const std::size_t small = transpose ? costs.cols() : costs.rows();
  const std::size_t large = transpose ? costs.rows() : costs.cols();
  if (small == 0) return 0.0;
  auto at = [&](std::size_t s, std::size_t l) { return transpose ? costs(l, s) : costs(s, l); };

  // Enumerate ordered selections of `small` distinct columns out of `large`.
  std::vector<std::size_t> columns(large);
  std::iota(columns.begin(), columns.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t s = 0; s < small; ++s) total += at(s, columns[s]);
    best = std::min(best, total);
  } while (std::next_permutation(columns.begin(), columns.end()));
  return best;
}

namespace {

void collect_matches(std::string_view a, std::string_view b, std::size_t& total) {
  if (a.empty() || b.empty()) return;
  // suffix[i][j]: length of the common run ending at a[i-1], b[j-1].
  std::vector<std::vector<std::size_t>> suffix(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  std::size_t best_len = 0, best_i = 0, best_j = 0;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] != b[j - 1]) continue;
      suffix[i][j] = suffix[i - 1][j - 1] + 1;
    }
  }
  // Longest run; ties go to the earliest start in a, then in b.
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t len = suffix[i][j];
      if (len == 0) continue;
      const std::size_t start_a = i - len, start_b = j - len;
      if (len > best_len || (len == best_len && std::tie(start_a, start_b) < std::tie(best_i, best_j))) {
        best_len = len;
        best_i = start_a;
        best_j = start_b;
      }
    }
  }
  if (best_len == 0) return;
  total += best_len;
  collect_matches(a.substr(0, best_i), b.substr(0, best_j), total);
  collect_matches(a.substr(best_i + best_len), b.substr(best_j + best_len), total);
}

}  // namespace

std::size_t reference_matches(std::string_view a, std::string_view b) {
  std::size_t total = 0;
  collect_matches(a, b, total);
  return total;
}

double reference_ratio(std::string_view a, std::string_view b) {
  if (a.empty() && b.empty()) return 1.0;
  return 2.0 * static_cast<double>(reference_matches(a, b)) / static_cast<double>(a.size() + b.size());
}

bool TreeEdit::operator<(const TreeEdit& o) const {
  return std::tie(kind, role, name, new_name) < std::tie(o.kind, o.role, o.name, o.new_name);
}
bool TreeEdit::operator==(const TreeEdit& o) const {
  return std::tie(kind, role, name, new_name) == std::tie(o.kind, o.role, o.name, o.new_name);
}

namespace {

struct Line {
  std::size_t depth;
  std::string role;
  std::string name;
  bool focused = false;
};

std::string render(const std::vector<Line>& lines) {
  std::string out;
  std::int64_t id = 1;
  for (const Line& line : lines) {
    out += std::string(line.depth, '\t') + "[" + std::to_string(id++) + "] " + line.role + " '" + line.name + "'";
    if (line.focused) out += " focused: True";
    out += "\n";
  }
  return out;
}

}  // namespace

EditedTree make_edited_tree(std::uint64_t seed, std::size_t max_elements, std::size_t max_edits) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };

  // Roles for elements that may be removed or renamed, and a disjoint set
  // for inserted elements.
  const std::vector<std::string> stable_roles = {"link", "button", "StaticText", "heading", "textbox"};
  const std::vector<std::string> insert_roles = {"checkbox", "combobox", "img", "menuitem"};

  const std::size_t target = uniform(std::max<std::size_t>(2, max_edits + 2), max_elements - max_edits);
  std::vector<Line> lines = {{0, "RootWebArea", "page-" + std::to_string(seed)}};
  std::size_t counter = 0;
  while (lines.size() < target) {
    const std::size_t depth = uniform(1, lines.back().depth + 1);
    lines.push_back({depth, stable_roles[uniform(0, stable_roles.size() - 1)], "item " + std::to_string(counter++)});
  }
  const std::vector<Line> before = lines;

  const std::size_t edit_count = uniform(1, max_edits);
  std::set<std::string> touched;
  EditedTree result;

  // Roles used by removals must not reappear among renamed elements.
  std::set<std::string> removed_roles, renamed_roles;
  for (std::size_t e = 0; e < edit_count; ++e) {
    const auto kind = static_cast<TreeEdit::Kind>(uniform(0, 3));
    if (kind == TreeEdit::Kind::add) {
      const std::size_t parent = uniform(0, lines.size() - 1);
      Line added{lines[parent].depth + 1, insert_roles[uniform(0, insert_roles.size() - 1)],
                 "new " + std::to_string(counter++)};
      touched.insert(added.name);
      result.edits.push_back({kind, added.role, added.name, ""});
      lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(parent + 1), added);
      continue;
    }
    // Pick an untouched, original, non-root element; removals need a leaf.
    std::vector<std::size_t> options;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (touched.count(lines[i].name) || lines[i].name.rfind("item ", 0) != 0) continue;
      const bool leaf = i + 1 == lines.size() || lines[i + 1].depth <= lines[i].depth;
      if (kind == TreeEdit::Kind::remove && (!leaf || renamed_roles.count(lines[i].role))) continue;
      if (kind == TreeEdit::Kind::rename && removed_roles.count(lines[i].role)) continue;
      options.push_back(i);
    }
    if (options.empty()) continue;
    const std::size_t i = options[uniform(0, options.size() - 1)];
    touched.insert(lines[i].name);
    if (kind == TreeEdit::Kind::remove) {
      removed_roles.insert(lines[i].role);
      result.edits.push_back({kind, lines[i].role, lines[i].name, ""});
      lines.erase(lines.begin() + static_cast<std::ptrdiff_t>(i));
    } else if (kind == TreeEdit::Kind::rename) {
      renamed_roles.insert(lines[i].role);
      const std::string fresh = "renamed " + std::to_string(counter++);
      result.edits.push_back({kind, lines[i].role, lines[i].name, fresh});
      lines[i].name = fresh;
      touched.insert(fresh);
    } else {
      result.edits.push_back({kind, lines[i].role, lines[i].name, ""});
      lines[i].focused = true;
    }
  }
  std::sort(result.edits.begin(), result.edits.end());
  result.before = render(before);
  result.after = render(lines);
  return result;
}

std::vector<TreeEdit> edits_from_delta(const AxTree& before, const AxTree& after, double match_threshold) {
  MatchWeights weights;
  weights.match_threshold = match_threshold;
  const TransitionDelta delta = compute_delta(before, after, weights);
  std::vector<TreeEdit> edits;
  for (const AxElement& e : delta.added) edits.push_back({TreeEdit::Kind::add, e.role, e.name, ""});
  for (const AxElement& e : delta.deleted) edits.push_back({TreeEdit::Kind::remove, e.role, e.name, ""});
  for (const UpdatedElement& u : delta.updated) {
    if (u.old_element.name != u.new_element.name) {
      edits.push_back({TreeEdit::Kind::rename, u.old_element.role, u.old_element.name, u.new_element.name});
    } else {
      edits.push_back({TreeEdit::Kind::property, u.old_element.role, u.old_element.name, ""});
    }
  }
  std::sort(edits.begin(), edits.end());
  return edits;
}

}  // namespace wma::testing
