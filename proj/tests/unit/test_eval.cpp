#include <gtest/gtest.h>

#include "harness.hpp"
#include "test_helpers.hpp"
#include "wma/error.hpp"
#include "wma/eval.hpp"
#include "wma/oracle.hpp"

namespace wma {
namespace {

using testing::mock;

// Five hand-scored (prediction, gold) pairs. The expected values are worked
// out by hand from whitespace-token counts.
struct HandPair {
  Action predicted;
  GoldStep gold;
  bool element_correct;
  double action_f1;
  bool step_success;
};

std::vector<HandPair> hand_pairs() {
  return {
      // Identical clicks.
      {Action::click(3), {Action::click(3), {}}, true, 1.0, true},
      // Wrong element: tokens {click, [4]} against {click, [3]} share one of two.
      {Action::click(4), {Action::click(3), {}}, false, 0.5, false},
      // 3 predicted tokens, 4 gold tokens, 2 shared: F1 = 2*2/(3+4) = 4/7.
      {Action::type(4, "shoes"), {Action::type(4, "running shoes"), {}}, true, 4.0 / 7.0, false},
      // Alternative element accepted but the verb differs.
      {Action::hover(5), {Action::click(3), {3, 5}}, true, 0.0, false},
      // Answers compare as text; no element on either side.
      {Action::stop("$59.99"), {Action::stop("$59.99"), {}}, true, 1.0, true},
  };
}

TEST(TokenF1, HandValues) {
  EXPECT_EQ(token_f1("", ""), 1.0);
  EXPECT_EQ(token_f1("a", ""), 0.0);
  EXPECT_EQ(token_f1("a b", "c d"), 0.0);
  EXPECT_DOUBLE_EQ(token_f1("a a b", "a b b"), 2.0 / 3.0);
  EXPECT_NEAR(token_f1("type [4] [shoes]", "type [4] [running shoes]"), 0.571, 5e-4);
}

TEST(MetricActionText, DropsThePressEnterFlag) {
  EXPECT_EQ(metric_action_text(Action::type(4, "shoes", false)), "type [4] [shoes]");
  EXPECT_EQ(metric_action_text(Action::click(9)), "click [9]");
  EXPECT_EQ(judge_step(Action::type(4, "x", false), {Action::type(4, "x", true), {}}).action_f1, 1.0);
}

TEST(JudgeStep, HandPairs) {
  for (const HandPair& p : hand_pairs()) {
    const StepJudgment j = judge_step(p.predicted, p.gold);
    const std::string label = render_action(p.predicted);
    EXPECT_EQ(j.element_correct, p.element_correct) << label;
    EXPECT_DOUBLE_EQ(j.action_f1, p.action_f1) << label;
    EXPECT_EQ(j.step_success, p.step_success) << label;
  }
}

TEST(ComputeMetrics, HandPairsAsOneTaskAndAsFive) {
  TaskPrediction whole{"all", {}, {}};
  std::vector<TaskPrediction> singles;
  for (const HandPair& p : hand_pairs()) {
    whole.predicted.push_back(p.predicted);
    whole.gold.push_back(p.gold);
    singles.push_back({render_action(p.predicted), {p.predicted}, {p.gold}});
  }
  const MetricsReport one = compute_metrics({whole});
  EXPECT_DOUBLE_EQ(one.element_accuracy, 0.8);
  EXPECT_DOUBLE_EQ(one.action_f1, (1.0 + 0.5 + 4.0 / 7.0 + 0.0 + 1.0) / 5.0);
  EXPECT_DOUBLE_EQ(one.step_success_rate, 0.4);
  EXPECT_EQ(one.success_rate, 0.0);

  const MetricsReport five = compute_metrics(singles);
  EXPECT_DOUBLE_EQ(five.element_accuracy, 0.8);
  EXPECT_DOUBLE_EQ(five.action_f1, one.action_f1);
  EXPECT_DOUBLE_EQ(five.success_rate, 0.4);
  EXPECT_NEAR(five.tasks[2].action_f1, 0.571, 5e-4);
}

TEST(JudgeTask, MissingAndExtraSteps) {
  const TaskJudgment missing = judge_task({"m", {Action::click(3)}, {{Action::click(3), {}}, {Action::stop(), {}}}});
  EXPECT_EQ(missing.flags, std::vector<std::string>{"missing_steps"});
  EXPECT_TRUE(missing.steps[1].missing);
  EXPECT_DOUBLE_EQ(missing.step_success_rate, 0.5);
  EXPECT_FALSE(missing.success);

  const TaskJudgment extra = judge_task({"e", {Action::click(3), Action::stop()}, {{Action::click(3), {}}}});
  EXPECT_EQ(extra.flags, std::vector<std::string>{"extra_steps"});
  EXPECT_TRUE(extra.success);
}

TEST(MetricsReport, JsonAndText) {
  const MetricsReport r = compute_metrics({{"t", {Action::click(3)}, {{Action::click(3), {}}}}});
  EXPECT_EQ(r.to_json().at("success_rate"), 1.0);
  EXPECT_NE(r.to_text().find("macro      "), std::string::npos);
  EXPECT_NE(r.to_text().find("1.0000"), std::string::npos);
  EXPECT_EQ(compute_metrics({}).success_rate, 0.0);
}

TEST(Coverage, LexicalFallback) {
  const CoverageResult r = coverage_score("The cart shows one item. A banner appears!",
                                          "The cart shows 1 item. The page scrolls. A banner appears.");
  EXPECT_EQ(r.total, 3u);
  EXPECT_EQ(r.covered, 2u);
  EXPECT_DOUBLE_EQ(r.score, 2.0 / 3.0);
  EXPECT_THROW(coverage_score("x", " . ! "), InvalidArgument);
  EXPECT_EQ(split_sentences("a. b!\nc?"), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Coverage, JudgeRepliesYesOrNo) {
  ModelClient judge(mock({{"rules", {{{"match", "contains"}, {"pattern", "one"}, {"response", "Yes."}}}}, {"default", "no"}}),
                    ModelRole::judge);
  const CoverageResult r = coverage_score("anything", "Sentence one. Sentence two.", &judge);
  EXPECT_EQ(r.covered, 1u);
}

// --- next-state multiple choice ------------------------------------------------

TEST(ChoiceParsing, LettersAndNumbers) {
  EXPECT_EQ(parse_choice_letter("Answer: B"), 1u);
  EXPECT_EQ(parse_choice_letter("answer:a because"), 0u);
  EXPECT_EQ(parse_choice_letter("I pick A."), 0u);
  EXPECT_EQ(parse_choice_letter("Both are Bad"), std::nullopt);
  EXPECT_EQ(parse_choice_number("Answer: 3", 4), 2u);
  EXPECT_EQ(parse_choice_number("Option 12 then 2", 4), 1u);
  EXPECT_EQ(parse_choice_number("none", 4), std::nullopt);
}

TEST(NextStateMcq, NegativeIsTheMostSimilarOtherState) {
  const auto trajectories = testing::gold_trajectories();
  for (const auto& trajectory : trajectories) {
    const auto items = build_next_state_mcq(trajectory, 5);
    ASSERT_EQ(items.size(), trajectory.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      EXPECT_EQ(items[i].choices[items[i].gold_index], trajectory[i].next_observation);
      EXPECT_NE(items[i].choices[1 - items[i].gold_index], trajectory[i].next_observation);
    }
  }
  EXPECT_THROW(build_next_state_mcq({}, 0), InsufficientStates);
}

TEST(NextStateMcq, ShufflesAreSeeded) {
  const auto trajectory = testing::gold_trajectories().at(8);
  std::vector<std::size_t> a, b;
  for (const McqItem& i : build_next_state_mcq(trajectory, 1)) a.push_back(i.gold_index);
  for (const McqItem& i : build_next_state_mcq(trajectory, 1)) b.push_back(i.gold_index);
  EXPECT_EQ(a, b);
}

TEST(Calibration, OracleIsPerfect) {
  const auto items = testing::gold_mcq_items();
  const ModelClient oracle(std::make_shared<MockBackend>(build_mcq_oracle_script(items)), ModelRole::world);
  const HarnessReport r = run_mcq_eval(items, oracle);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.unparseable, 0u);
}

TEST(Calibration, CoinFlipNearHalf) {
  std::vector<McqItem> items;
  for (std::uint64_t seed = 0; items.size() < 200; ++seed) {
    for (McqItem& i : testing::gold_mcq_items(seed * 1000)) items.push_back(std::move(i));
  }
  items.resize(200);
  const ModelClient coin(std::make_shared<MockBackend>(build_coin_flip_script(42)), ModelRole::world);
  const HarnessReport r = run_mcq_eval(items, coin);
  EXPECT_GE(r.accuracy, 0.40);
  EXPECT_LE(r.accuracy, 0.60);
}

TEST(Calibration, UniformSelectionNearOneInTen) {
  const auto items = testing::gold_selection_items(500, 10);
  for (const SelectionItem& item : items) ASSERT_EQ(item.choices.size(), 10u);
  const ModelClient uniform(std::make_shared<MockBackend>(build_uniform_selection_script(10, 42)), ModelRole::policy);
  const HarnessReport r = run_action_selection_eval(items, uniform, false);
  EXPECT_GE(r.accuracy, 0.05);
  EXPECT_LE(r.accuracy, 0.16);
}

TEST(Calibration, SelectionOracleIsPerfect) {
  const auto items = testing::gold_selection_items(30, 4);
  const ModelClient oracle(std::make_shared<MockBackend>(build_selection_oracle_script(items, false)), ModelRole::policy);
  EXPECT_EQ(run_action_selection_eval(items, oracle, false).accuracy, 1.0);
}

TEST(Selection, ItemPlacementAndValidation) {
  const SelectionItem item = make_selection_item("o", "obs", "gold", {"n1", "n2"}, 3, {"g", "s1", "s2"});
  ASSERT_EQ(item.choices.size(), 3u);
  EXPECT_EQ(item.choices[item.gold_index], "gold");
  EXPECT_EQ(item.next_states[item.gold_index], "g");
  EXPECT_THROW(make_selection_item("o", "obs", "gold", {"n1"}, 3, {"g"}), InvalidArgument);
  EXPECT_THROW(run_action_selection_eval({make_selection_item("o", "obs", "g", {"n"}, 0)}, ModelClient{}, true),
               InvalidArgument);
}

TEST(Selection, UnparseableRepliesAreCounted) {
  const auto items = testing::gold_selection_items(5, 4);
  const ModelClient model(mock({{"default", "I cannot decide"}}), ModelRole::policy);
  const HarnessReport r = run_action_selection_eval(items, model, false);
  EXPECT_EQ(r.unparseable, 5u);
  EXPECT_EQ(r.accuracy, 0.0);
}

TEST(NegativeActions, ParsedAndFiltered) {
  const ModelClient model(mock({{"default", "click [3]\nclick [9]\nnonsense\nscroll [down]\nclick [9]"}}), ModelRole::policy);
  const auto negatives = generate_negative_actions(model, "goal", "obs", "click [3]", 5);
  EXPECT_EQ(negatives, (std::vector<std::string>{"click [9]", "scroll [down]"}));
}

}  // namespace
}  // namespace wma
