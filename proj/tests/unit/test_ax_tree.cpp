#include <gtest/gtest.h>

#include "wma/ax_tree.hpp"
#include "wma/error.hpp"

namespace wma {
namespace {

TEST(AxTreeParse, SingleElement) {
  const AxTree tree = parse_axtree("[1] button 'Add to cart'");
  ASSERT_EQ(tree.size(), 1u);
  const AxElement& e = tree.elements[0];
  EXPECT_EQ(e.elem_id, 1);
  EXPECT_EQ(e.role, "button");
  EXPECT_EQ(e.name, "Add to cart");
  EXPECT_EQ(e.depth, 0u);
  EXPECT_EQ(e.line_index, 0u);
}

TEST(AxTreeParse, EmptyInputIsEmptyTree) {
  const AxTree tree = parse_axtree("");
  EXPECT_TRUE(tree.empty());
}

TEST(AxTreeParse, DepthsAndLineIndices) {
  const AxTree tree = parse_axtree("[1] RootWebArea 'Home'\n\t[2] link 'About'\n[3] button 'Go'\n");
  ASSERT_EQ(tree.size(), 3u);
  EXPECT_EQ(tree.elements[0].depth, 0u);
  EXPECT_EQ(tree.elements[1].depth, 1u);
  EXPECT_EQ(tree.elements[2].depth, 0u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(tree.elements[i].line_index, i);
  const AxTree again = parse_axtree(render_axtree(tree));
  EXPECT_EQ(again.elements, tree.elements);
}

TEST(AxTreeParse, SpaceIndentationIsDetected) {
  const AxTree tree = parse_axtree("[1] RootWebArea 'r'\n  [2] link 'a'\n    [3] link 'b'\n");
  ASSERT_EQ(tree.size(), 3u);
  EXPECT_EQ(tree.elements[2].depth, 2u);
}

TEST(AxTreeParse, PropertiesAreKept) {
  const AxTree tree = parse_axtree("[5] textbox 'Search' focused: True required: False");
  ASSERT_EQ(tree.size(), 1u);
  ASSERT_EQ(tree.elements[0].extra.size(), 2u);
  EXPECT_EQ(tree.elements[0].extra[0], (Property{"focused", "True"}));
  EXPECT_EQ(tree.elements[0].extra[1], (Property{"required", "False"}));
}

TEST(AxTreeParse, InertLinesArePreserved) {
  const AxTree tree = parse_axtree("Tab 0 (current): Shop\n[1] RootWebArea 'Shop'\n");
  ASSERT_EQ(tree.inert.size(), 1u);
  EXPECT_EQ(tree.inert[0].position, 0u);
  EXPECT_EQ(tree.inert[0].text, "Tab 0 (current): Shop");
}

TEST(AxTreeParse, NonIntegerIdReportsLine) {
  try {
    parse_axtree("[1] RootWebArea 'r'\n\t[x] link 'bad'\n");
    FAIL() << "expected MalformedLine";
  } catch (const MalformedLine& e) {
    EXPECT_EQ(e.line_number(), 2u);
  }
}

TEST(AxTreeLookup, FindByIdAndByRoleName) {
  const AxTree tree = parse_axtree("[1] RootWebArea 'r'\n\t[7] link 'Cart'\n");
  ASSERT_NE(tree.find(7), nullptr);
  EXPECT_EQ(tree.find(7)->name, "Cart");
  EXPECT_EQ(tree.find("link", "Cart")->elem_id, 7);
  EXPECT_EQ(tree.find(99), nullptr);
}

TEST(NormalizeWhitespace, CollapsesRuns) { EXPECT_EQ(normalize_whitespace("  a \t b\n\nc  "), "a b c"); }

}  // namespace
}  // namespace wma
