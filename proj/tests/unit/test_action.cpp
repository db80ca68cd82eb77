#include <gtest/gtest.h>

#include "wma/action.hpp"
#include "wma/error.hpp"

namespace wma {
namespace {

TEST(ActionParse, FencedClick) {
  const Action a = parse_action("```click [42]```");
  EXPECT_EQ(a, Action::click(42));
}

TEST(ActionParse, TypeWithEnterFlag) {
  const Action a = parse_action("```type [7] [hello] [1]```");
  EXPECT_EQ(a.kind, ActionKind::type);
  EXPECT_EQ(a.target, 7);
  EXPECT_EQ(a.text, "hello");
  EXPECT_EQ(a.press_enter, true);
  EXPECT_EQ(parse_action(render_action(a)), a);
}

TEST(ActionParse, TypeDefaultsToPressingEnter) {
  EXPECT_EQ(parse_action("type [3] [mugs]").press_enter, true);
  EXPECT_EQ(parse_action("type [3] [mugs] [0]").press_enter, false);
}

TEST(ActionParse, ProseWithoutActionIsRejected) {
  EXPECT_THROW(parse_action("I will do nothing"), UnparseableAction);
}

TEST(ActionParse, UnknownVerbIsRejected) { EXPECT_THROW(parse_action("```teleport [3]```"), UnparseableAction); }

TEST(ActionParse, SummaryBlockWinsOverEarlierBlocks) {
  const Action a = parse_action("Maybe ```click [1]``` first. In summary, the next action I will perform is ```click [2]```");
  EXPECT_EQ(a, Action::click(2));
}

TEST(ActionParse, StopWithAndWithoutAnswer) {
  EXPECT_EQ(parse_action("stop [3]"), Action::stop("3"));
  EXPECT_EQ(parse_action("stop"), Action::stop());
}

TEST(ActionParse, NavigationVerbs) {
  EXPECT_EQ(parse_action("goto [http://a.local/x]"), Action::go_to("http://a.local/x"));
  EXPECT_EQ(parse_action("go_back"), Action::go_back());
  EXPECT_EQ(parse_action("hover [9]"), Action::hover(9));
}

TEST(ActionRender, CanonicalForms) {
  EXPECT_EQ(render_action(Action::click(42)), "click [42]");
  EXPECT_EQ(render_action(Action::stop("3")), "stop [3]");
  EXPECT_EQ(render_action(Action::scroll("down")), "scroll [down]");
  EXPECT_EQ(render_action(Action::type(7, "hello")), "type [7] [hello] [1]");
  EXPECT_EQ(render_action(Action::go_back()), "go_back");
  EXPECT_EQ(render_action(Action::none()), "none");
}

TEST(ActionValidate, MissingTargetIsRejected) {
  Action a;
  a.kind = ActionKind::click;
  EXPECT_THROW(validate(a), UnparseableAction);
}

TEST(ActionEquality, RationaleDoesNotCount) {
  Action a = Action::click(1);
  a.rationale = "because";
  EXPECT_EQ(a, Action::click(1));
}

}  // namespace
}  // namespace wma
