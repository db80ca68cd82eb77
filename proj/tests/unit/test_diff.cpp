#include <gtest/gtest.h>

#include <algorithm>

#include "wma/abstraction.hpp"
#include "wma/diff.hpp"
#include "wma/error.hpp"

namespace wma {
namespace {

AxElement element(std::string role, std::string name, std::size_t line) {
  AxElement e;
  e.role = std::move(role);
  e.name = std::move(name);
  e.line_index = line;
  return e;
}

TEST(CostMatrixBuild, IdenticalElementsCostNothing) {
  const CostMatrix c = build_cost_matrix({element("link", "a", 0)}, {element("link", "a", 0)}, MatchWeights{});
  EXPECT_EQ(c(0, 0), 0.0);
}

TEST(CostMatrixBuild, LocationTerm) {
  MatchWeights w;
  w.w_loc = 0.1;
  const CostMatrix c = build_cost_matrix({element("link", "a", 0)}, {element("link", "a", 3)}, w);
  EXPECT_DOUBLE_EQ(c(0, 0), 0.3);
}

TEST(CostMatrixBuild, NameAndRoleMismatch) {
  const CostMatrix c = build_cost_matrix({element("link", "a", 2)}, {element("button", "b", 2)}, MatchWeights{});
  EXPECT_EQ(c(0, 0), 2.0);
}

TEST(CostMatrixBuild, PrintedSignChargesEquality) {
  MatchWeights w;
  w.printed_sign = true;
  const CostMatrix c = build_cost_matrix({element("link", "a", 0)}, {element("link", "a", 0)}, w);
  EXPECT_EQ(c(0, 0), 2.0);
}

TEST(CostMatrixBuild, EmptySideIsAnError) {
  EXPECT_THROW(build_cost_matrix({}, {element("link", "a", 0)}, MatchWeights{}), EmptyObservation);
}

TEST(MatchWeightsValidate, RejectsBadValues) {
  MatchWeights w;
  w.w_loc = -1;
  EXPECT_THROW(w.validate(), InvalidArgument);
  w = MatchWeights{};
  w.tau = 0;
  EXPECT_THROW(w.validate(), InvalidArgument);
}

constexpr const char* kHome =
    "[1] RootWebArea 'Shop'\n"
    "\t[2] link 'Home'\n"
    "\t[3] link 'Cart (0)'\n"
    "\t[4] searchbox 'Search'\n"
    "\t[5] button 'Go'\n";

TEST(ComputeDelta, IdentityTransition) {
  const AxTree tree = parse_axtree(kHome);
  const TransitionDelta d = compute_delta(tree, tree, MatchWeights{});
  EXPECT_TRUE(d.empty());
  EXPECT_EQ(d.unchanged_count, tree.size());
}

TEST(ComputeDelta, OneAddedElement) {
  const AxTree before = parse_axtree(kHome);
  const AxTree after = parse_axtree(std::string(kHome) + "\t[6] StaticText 'Added to cart'\n");
  const TransitionDelta d = compute_delta(before, after, MatchWeights{});
  ASSERT_EQ(d.added.size(), 1u);
  EXPECT_EQ(d.added[0].name, "Added to cart");
  EXPECT_TRUE(d.deleted.empty());
  EXPECT_TRUE(d.updated.empty());
  EXPECT_EQ(d.unchanged_count, before.size());
}

TEST(ComputeDelta, RenameInPlaceAboveThreshold) {
  const AxTree before = parse_axtree(kHome);
  std::string text = kHome;
  text.replace(text.find("Cart (0)"), 8, "Cart (1)");
  const AxTree after = parse_axtree(text);
  MatchWeights w;
  w.match_threshold = 1.5;
  const TransitionDelta d = compute_delta(before, after, w);
  ASSERT_EQ(d.updated.size(), 1u);
  EXPECT_EQ(d.updated[0].old_element.name, "Cart (0)");
  EXPECT_EQ(d.updated[0].new_element.name, "Cart (1)");
  EXPECT_EQ(d.updated[0].changed_fields, (std::vector<std::string>{"name"}));
  EXPECT_EQ(render_delta_text(d), "[UPDATED]\n- link 'Cart (0)' → 'Cart (1)' (name)");
}

TEST(ComputeDelta, RenameBelowThresholdIsDeleteAndAdd) {
  const AxTree before = parse_axtree(kHome);
  std::string text = kHome;
  text.replace(text.find("Cart (0)"), 8, "Cart (1)");
  const TransitionDelta d = compute_delta(before, parse_axtree(text), MatchWeights{});
  EXPECT_EQ(d.added.size(), 1u);
  EXPECT_EQ(d.deleted.size(), 1u);
  EXPECT_TRUE(d.updated.empty());
}

TEST(ComputeDelta, PropertyChangeIsAnUpdate) {
  const AxTree before = parse_axtree(kHome);
  std::string text = kHome;
  text.replace(text.find("'Search'"), 8, "'Search' focused: True");
  const TransitionDelta d = compute_delta(before, parse_axtree(text), MatchWeights{});
  ASSERT_EQ(d.updated.size(), 1u);
  EXPECT_EQ(d.updated[0].changed_fields, (std::vector<std::string>{"properties"}));
}

TEST(ComputeDelta, RenumberedIdsAreIgnored) {
  const AxTree before = parse_axtree("[1] RootWebArea 'r'\n\t[2] link 'a'\n");
  const AxTree after = parse_axtree("[10] RootWebArea 'r'\n\t[20] link 'a'\n");
  EXPECT_TRUE(compute_delta(before, after, MatchWeights{}).empty());
}

TEST(ComputeDelta, EmptySides) {
  const AxTree tree = parse_axtree(kHome);
  const TransitionDelta all_added = compute_delta(AxTree{}, tree, MatchWeights{});
  EXPECT_EQ(all_added.added.size(), tree.size());
  const TransitionDelta all_deleted = compute_delta(tree, AxTree{}, MatchWeights{});
  EXPECT_EQ(all_deleted.deleted.size(), tree.size());
}

TEST(TaoState, IdentityGivesFullObservation) {
  const AxTree tree = parse_axtree(kHome);
  const TaoResult r = tao_state_detail(tree, tree, MatchWeights{});
  EXPECT_EQ(r.branch, TaoBranch::no_unmatched);
  EXPECT_EQ(r.elements, tree.elements);
}

TEST(TaoState, SizeGateGivesFullObservation) {
  const AxTree before = parse_axtree("[1] RootWebArea 'r'\n\t[2] link 'a'\n");
  std::string text = "[1] RootWebArea 'r'\n\t[2] link 'a'\n";
  for (int i = 3; i <= 6; ++i) text += "\t[" + std::to_string(i) + "] link 'n" + std::to_string(i) + "'\n";
  const AxTree after = parse_axtree(text);
  ASSERT_EQ(after.size(), 3 * before.size());
  const TaoResult r = tao_state_detail(before, after, MatchWeights{});
  EXPECT_EQ(r.branch, TaoBranch::size_gate);
  EXPECT_EQ(r.elements, after.elements);
}

TEST(TaoState, NewElementWithNeighbours) {
  std::string base;
  for (int i = 0; i < 9; ++i) base += "[" + std::to_string(i + 1) + "] link 'item " + std::to_string(i) + "'\n";
  const AxTree before = parse_axtree(base);
  // Insert a new element in the middle (position 4 of the new list).
  std::string text;
  for (int i = 0; i < 9; ++i) {
    if (i == 4) text += "[99] button 'Fresh'\n";
    text += "[" + std::to_string(i + 1) + "] link 'item " + std::to_string(i) + "'\n";
  }
  const AxTree after = parse_axtree(text);
  const TaoResult r = tao_state_detail(before, after, MatchWeights{});
  EXPECT_EQ(r.branch, TaoBranch::focused);
  EXPECT_EQ(r.unmatched, (std::vector<std::size_t>{4}));
  std::vector<std::size_t> lines;
  for (const AxElement& e : r.elements) lines.push_back(e.line_index);
  EXPECT_EQ(lines, (std::vector<std::size_t>{2, 3, 4, 5, 6}));
}

TEST(TaoState, StrictModeIgnoresInPlaceChanges) {
  const AxTree before = parse_axtree("[1] link 'a'\n[2] link 'b'\n");
  const AxTree after = parse_axtree("[1] link 'a'\n[2] link 'c'\n");
  MatchWeights strict;
  strict.tao_mode = TaoMode::strict;
  EXPECT_EQ(tao_state_detail(before, after, strict).branch, TaoBranch::no_unmatched);
  EXPECT_EQ(tao_state_detail(before, after, MatchWeights{}).unmatched, (std::vector<std::size_t>{1}));
}

TEST(RenderDeltaText, Sections) {
  TransitionDelta d;
  EXPECT_EQ(render_delta_text(d), "No observable change.");
  AxElement submit;
  submit.role = "button";
  submit.name = "Submit";
  d.added.push_back(submit);
  EXPECT_EQ(render_delta_text(d), "[ADDED]\n- button 'Submit'");
  d.deleted.push_back(submit);
  EXPECT_EQ(render_delta_text(d), "[ADDED]\n- button 'Submit'\n\n[DELETED]\n- button 'Submit'");
}

}  // namespace
}  // namespace wma
