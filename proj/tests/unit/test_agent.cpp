#include <gtest/gtest.h>

#include "harness.hpp"
#include "test_helpers.hpp"
#include "wma/agent.hpp"
#include "wma/error.hpp"

namespace wma {
namespace {

using nlohmann::json;
using testing::cot;
using testing::mock;

const AxTree& home_page() {
  static const AxTree tree = testing::load_bundled("shop-mini.json")->page("home").tree;
  return tree;
}

const Instruction kInstruction{"x", "Open the cart", "shopping"};

Action candidate_action(const std::vector<Candidate>& cs, std::size_t i) { return cs.at(i).action; }

TEST(RenderHistory, WindowAndEmpty) {
  EXPECT_EQ(render_history({}, 5), "None");
  const std::vector<HistoryEntry> h = {{"click [1]", "r1"}, {"click [2]", "r2"}, {"click [3]", "r3"}};
  const std::string two = render_history(h, 2);
  EXPECT_EQ(two.find("click [1]"), std::string::npos);
  EXPECT_NE(two.find("click [2]"), std::string::npos);
  EXPECT_NE(two.find("r3"), std::string::npos);
}

TEST(RankCandidates, FrequencyThenFirstSeen) {
  const std::vector<Action> actions = {Action::click(1), Action::click(2), Action::click(2),
                                       Action::click(3), Action::click(1), Action::scroll("down")};
  const std::vector<Candidate> top = rank_candidates(actions, 3);
  ASSERT_EQ(top.size(), 3u);
  EXPECT_EQ(candidate_action(top, 0), Action::click(1));
  EXPECT_EQ(candidate_action(top, 1), Action::click(2));
  EXPECT_EQ(candidate_action(top, 2), Action::click(3));
  EXPECT_EQ(top[0].frequency, 2u);
  EXPECT_EQ(top[2].rank_index, 2u);
  EXPECT_EQ(rank_candidates(actions, 10).size(), 4u);
  EXPECT_THROW(rank_candidates({}, 3), EmptyActionList);
}

TEST(ParseScore, FirstNumber) {
  EXPECT_EQ(parse_score("0.75"), 0.75);
  EXPECT_EQ(parse_score("Score: .5 out of 1"), 0.5);
  EXPECT_EQ(parse_score("I'd say -0.25"), -0.25);
  EXPECT_EQ(parse_score("1"), 1.0);
  EXPECT_FALSE(parse_score("no idea"));
}

TEST(Score, ClipsOutOfRangeReplies) {
  Backends b = testing::single_backend(mock({{"default", "1.7"}}));
  const Score s = score(b, kInstruction, home_page(), Action::click(3), std::string("cart"), ScoreMode::with_next_state);
  EXPECT_EQ(s.value, 1.0);
  EXPECT_EQ(s.flags, (std::vector<std::string>{"clipped"}));
}

TEST(Score, RetriesOnceThenFlagsNoScore) {
  auto backend = mock({{"default", "unsure"}});
  Backends b = testing::single_backend(backend);
  const Score s = score(b, kInstruction, home_page(), Action::click(3), std::nullopt, ScoreMode::q_value);
  EXPECT_EQ(s.value, 0.0);
  EXPECT_EQ(s.flags, (std::vector<std::string>{"no_score"}));
  EXPECT_EQ(backend->call_count(), 2u);
  EXPECT_THROW(score(b, kInstruction, home_page(), Action::click(3), std::nullopt, ScoreMode::with_next_state),
               InvalidArgument);
}

TEST(Score, QValueUsesItsOwnPrompt) {
  Backends b = testing::single_backend(mock({{"rules",
                                              {{{"match", "contains"}, {"pattern", "[task: value_q]"}, {"response", "0.3"}},
                                               {{"match", "contains"}, {"pattern", "[task: value]"}, {"response", "0.9"}}}}}));
  EXPECT_EQ(score(b, kInstruction, home_page(), Action::click(3), std::nullopt, ScoreMode::q_value).value, 0.3);
  EXPECT_EQ(score(b, kInstruction, home_page(), Action::click(3), std::string("s"), ScoreMode::with_next_state).value, 0.9);
}

TEST(SelectIndex, RewardThenFrequencyThenRank) {
  std::vector<Candidate> cs(3);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    cs[i].action = Action::click(static_cast<std::int64_t>(i));
    cs[i].rank_index = i;
    cs[i].frequency = 1;
  }
  cs[1].reward = 0.5;
  EXPECT_EQ(select_index(cs), 1u);
  cs[2].reward = 0.5;
  cs[2].frequency = 2;
  EXPECT_EQ(select_index(cs), 2u);
  cs[2].frequency = 1;
  EXPECT_EQ(select_index(cs), 1u);
  EXPECT_THROW(select_index({}), EmptyCandidates);
}

TEST(SampleActions, ParsesEverySample) {
  Backends b = testing::single_backend(mock({{"rules", {{{"match", "contains"}, {"pattern", "[task: policy_cot]"},
                                                        {"responses", {cot("click [3]"), "garbage", cot("scroll [down]")}}}}}}));
  const SampleResult r = sample_actions(b, home_page(), kInstruction, "None", 6, 1.0);
  EXPECT_EQ(r.actions.size(), 4u);
  EXPECT_EQ(r.dropped, 2u);
  EXPECT_FALSE(r.retried);
}

TEST(SampleActions, RetriesWithTheFormatReminder) {
  Backends b = testing::single_backend(mock({{"rules",
                                              {{{"match", "contains"}, {"pattern", "Remember to end your answer"}, {"response", cot("click [3]")}},
                                               {{"match", "contains"}, {"pattern", "[task: policy_cot]"}, {"response", "I would click the cart"}}}}}));
  const SampleResult r = sample_actions(b, home_page(), kInstruction, "None", 3, 1.0);
  EXPECT_TRUE(r.retried);
  EXPECT_FALSE(r.fell_back);
  EXPECT_EQ(r.dropped, 3u);
  EXPECT_EQ(r.actions, std::vector<Action>(3, Action::click(3)));
}

TEST(SampleActions, FallsBackToNone) {
  Backends b = testing::single_backend(mock({{"default", "no action here"}}));
  const SampleResult r = sample_actions(b, home_page(), kInstruction, "None", 2, 1.0);
  EXPECT_TRUE(r.fell_back);
  EXPECT_EQ(r.actions, std::vector<Action>{Action::none()});
  EXPECT_THROW(sample_actions(b, home_page(), kInstruction, "None", 0, 1.0), InvalidArgument);
}

TEST(Simulate, BlankPredictionIsAnError) {
  Backends b = testing::single_backend(mock({{"default", " \n"}}));
  EXPECT_THROW(simulate(b, home_page(), Action::click(3), kInstruction), EmptyResponse);
}

// --- episodes on the shop scenario -------------------------------------------

class ShopEpisodes : public ::testing::Test {
 protected:
  std::shared_ptr<const Scenario> shop = testing::load_bundled("shop-mini.json");
};

TEST_F(ShopEpisodes, OracleSolvesEveryTaskWithinFiveActions) {
  for (const ScenarioTask& task : shop->tasks) {
    const Backends b = testing::single_backend(testing::oracle_backend(*shop));
    const Trajectory t = testing::run_task(shop, task.instruction.id, b, testing::scripted_config(), AgentMode::wma);
    EXPECT_TRUE(t.success) << task.instruction.id;
    EXPECT_EQ(t.outcome, "stop") << task.instruction.id;
    EXPECT_LE(t.steps.size(), 5u);
    for (const StepRecord& s : t.steps) {
      EXPECT_EQ(s.env_executions, 1u);
      EXPECT_LE(s.simulate_calls, 3u);
      EXPECT_LE(s.candidates.size(), 3u);
    }
  }
}

TEST_F(ShopEpisodes, FrequencyVoteFollowsTheMajorityDistractor) {
  const Backends b = testing::single_backend(testing::oracle_backend(*shop));
  const Trajectory t = testing::run_task(shop, "shop-01", b, testing::scripted_config(), AgentMode::baseline);
  EXPECT_FALSE(t.success);
  EXPECT_EQ(t.outcome, "max_steps");
  for (const StepRecord& s : t.steps) {
    EXPECT_EQ(s.simulate_calls, 0u);
    EXPECT_EQ(s.chosen, Action::scroll("down"));
  }
}

TEST_F(ShopEpisodes, KOneMatchesTheBaselineByteForByte) {
  for (const ScenarioTask& task : shop->tasks) {
    const Trajectory k1 = testing::run_task(shop, task.instruction.id,
                                            testing::single_backend(testing::oracle_backend(*shop)),
                                            testing::scripted_config(1), AgentMode::wma);
    const Trajectory base = testing::run_task(shop, task.instruction.id,
                                              testing::single_backend(testing::oracle_backend(*shop)),
                                              testing::scripted_config(3), AgentMode::baseline);
    EXPECT_EQ(trajectory_jsonl(k1), trajectory_jsonl(base)) << task.instruction.id;
  }
}

TEST_F(ShopEpisodes, ConstantValueNeverBeatsTheOracle) {
  std::size_t oracle = 0, constant = 0;
  for (const ScenarioTask& task : shop->tasks) {
    oracle += testing::run_task(shop, task.instruction.id, testing::single_backend(testing::oracle_backend(*shop)),
                                testing::scripted_config(), AgentMode::wma).success;
    constant += testing::run_task(shop, task.instruction.id,
                                  testing::single_backend(testing::oracle_backend(*shop, true)),
                                  testing::scripted_config(), AgentMode::wma).success;
  }
  EXPECT_EQ(oracle, 10u);
  EXPECT_LE(constant, oracle);
}

TEST_F(ShopEpisodes, LedgerCountsCallsPerRole) {
  const Backends b = testing::single_backend(testing::oracle_backend(*shop));
  const Trajectory t = testing::run_task(shop, "shop-01", b, testing::scripted_config(), AgentMode::wma);
  std::size_t sims = 0, values = 0;
  for (const StepRecord& s : t.steps) {
    sims += s.simulate_calls;
    values += s.value_calls;
  }
  EXPECT_EQ(t.ledger.calls(ModelRole::policy), static_cast<std::int64_t>(t.steps.size()));
  EXPECT_EQ(t.ledger.calls(ModelRole::world), static_cast<std::int64_t>(sims));
  EXPECT_EQ(t.ledger.calls(ModelRole::value), static_cast<std::int64_t>(values));
}

TEST_F(ShopEpisodes, QValueModeNeverSimulates) {
  AgentConfig config = testing::scripted_config();
  config.score_mode = ScoreMode::q_value;
  const Backends b = testing::single_backend(testing::oracle_backend(*shop));
  const Trajectory t = testing::run_task(shop, "shop-01", b, config, AgentMode::wma);
  for (const StepRecord& s : t.steps) EXPECT_EQ(s.simulate_calls, 0u);
  EXPECT_EQ(t.ledger.calls(ModelRole::world), 0);
}

TEST_F(ShopEpisodes, UnanimousSamplesSkipSimulation) {
  Backends b = testing::single_backend(mock({{"rules", {{{"match", "contains"}, {"pattern", "[task: policy_cot]"}, {"response", cot("stop")}}}}}));
  const Trajectory t = testing::run_task(shop, "shop-01", b, testing::scripted_config(), AgentMode::wma);
  ASSERT_EQ(t.steps.size(), 1u);
  EXPECT_EQ(t.steps[0].simulate_calls, 0u);
  EXPECT_EQ(t.steps[0].value_calls, 0u);
  EXPECT_EQ(t.outcome, "stop");
}

TEST_F(ShopEpisodes, WorldModelFailureScoresZeroAndContinues) {
  auto policy = mock({{"rules", {{{"match", "contains"}, {"pattern", "[task: policy_cot]"}, {"responses", {cot("click [3]"), cot("scroll [down]")}}}}}});
  Backends b = testing::single_backend(policy);
  b.world = ModelClient();
  const Trajectory t = testing::run_task(shop, "shop-01", b, testing::scripted_config(2), AgentMode::wma);
  ASSERT_FALSE(t.steps.empty());
  for (const Candidate& c : t.steps[0].candidates) {
    EXPECT_EQ(c.reward, 0.0);
    EXPECT_EQ(c.flags, (std::vector<std::string>{"simulate_failed"}));
  }
  EXPECT_EQ(t.steps[0].chosen, Action::click(3));
}

class ExplodingEnv final : public Environment {
 public:
  const AxTree& observation() const override { return tree_; }
  const AxTree& step(const Action&) override {
    if (++executions_ > 1) throw InvalidArgument("page crashed");
    return tree_;
  }
  bool terminated() const override { return false; }
  std::optional<std::string> answer() const override { return std::nullopt; }
  std::size_t executions() const override { return executions_; }

 private:
  AxTree tree_ = home_page();
  std::size_t executions_ = 0;
};

TEST(RunEpisode, EnvironmentFailureKeepsThePartialTrajectory) {
  ExplodingEnv env;
  Backends b = testing::single_backend(mock({{"default", cot("scroll [down]")}}));
  try {
    run_episode(env, b, kInstruction, testing::scripted_config(), AgentMode::wma);
    FAIL() << "expected EpisodeFailed";
  } catch (const EpisodeFailed& e) {
    EXPECT_EQ(e.partial().steps.size(), 2u);
    EXPECT_EQ(e.partial().outcome, "error");
    EXPECT_EQ(e.partial().error, "page crashed");
  }
}

TEST(RunEpisode, InvalidConfigIsRejected) {
  ExplodingEnv env;
  AgentConfig config;
  config.k = 0;
  EXPECT_THROW(run_episode(env, Backends{}, kInstruction, config), InvalidArgument);
}

TEST(TrajectoryJsonl, StepLinesThenFooter) {
  const auto shop = testing::load_bundled("shop-mini.json");
  const Trajectory t = testing::run_task(shop, "shop-01", testing::single_backend(testing::oracle_backend(*shop)),
                                         testing::scripted_config(), AgentMode::wma);
  const std::string text = trajectory_jsonl(t);
  std::vector<json> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(json::parse(line));
  ASSERT_EQ(lines.size(), t.steps.size() + 1);
  EXPECT_EQ(lines.front().at("type"), "step");
  EXPECT_EQ(lines.back().at("type"), "footer");
  EXPECT_EQ(lines.back().at("success"), true);
  EXPECT_EQ(lines.back().at("task_id"), "shop-01");
}

// --- self-refinement ---------------------------------------------------------

TEST(SelfRefine, RevisionReplacesTheDraft) {
  Backends b = testing::single_backend(mock({{"rules",
                                              {{{"match", "contains"}, {"pattern", "[task: self_refine]"}, {"response", cot("click [3]")}},
                                               {{"match", "contains"}, {"pattern", "[task: policy_cot]"}, {"response", cot("click [7]")}},
                                               {{"match", "contains"}, {"pattern", "[task: world_model]"}, {"response", "A product page opens."}}}}}));
  const RefineResult r = self_refine(b, home_page(), kInstruction, "None", testing::scripted_config());
  EXPECT_EQ(r.draft, Action::click(7));
  EXPECT_EQ(r.final_action, Action::click(3));
  ASSERT_TRUE(r.simulated);
  EXPECT_EQ(r.simulated->text, "A product page opens.");
  EXPECT_TRUE(r.flags.empty());
}

TEST(SelfRefine, UnparseableRevisionKeepsTheDraft) {
  Backends b = testing::single_backend(mock({{"rules",
                                              {{{"match", "contains"}, {"pattern", "[task: self_refine]"}, {"response", "hmm"}},
                                               {{"match", "contains"}, {"pattern", "[task: policy_cot]"}, {"response", cot("click [7]")}}}}}));
  b.world = ModelClient();
  const RefineResult r = self_refine(b, home_page(), kInstruction, "None", testing::scripted_config());
  EXPECT_EQ(r.final_action, Action::click(7));
  EXPECT_EQ(r.flags, (std::vector<std::string>{"simulate_failed", "refine_unparseable"}));
}

// --- search ------------------------------------------------------------------

class DeceptiveSearch : public ::testing::Test {
 protected:
  std::shared_ptr<const Scenario> scenario = testing::load_bundled("deceptive.json");
  Backends fresh() const {
    return testing::single_backend(std::make_shared<MockBackend>(MockScript::load(testing::scenario_file("deceptive.mock.json"))));
  }
  Trajectory run(std::size_t depth) const {
    SearchOptions options;
    options.width = 2;
    options.depth = depth;
    return testing::run_search_task(scenario, "deceptive-01", fresh(), testing::scripted_config(), options);
  }
};

TEST_F(DeceptiveSearch, DepthTwoSeesPastTheTeaser) {
  const Trajectory t = run(2);
  EXPECT_TRUE(t.success);
  ASSERT_FALSE(t.steps.empty());
  EXPECT_EQ(t.steps[0].executed.front(), "click [3]");
}

TEST_F(DeceptiveSearch, DepthOneTakesTheBait) {
  const Trajectory t = run(1);
  EXPECT_FALSE(t.success);
  ASSERT_FALSE(t.steps.empty());
  EXPECT_EQ(t.steps[0].chosen, Action::click(2));
}

TEST_F(DeceptiveSearch, BudgetBoundsEnvironmentSteps) {
  SandboxEnv env(scenario, "deceptive-01");
  SearchOptions options;
  options.width = 2;
  options.depth = 3;
  options.budget = 3;
  const SearchResult r = search_multistep(env, fresh(), env.task().instruction, {}, testing::scripted_config(), options);
  EXPECT_LE(r.env_steps, 3u);
  EXPECT_FALSE(r.executed.empty());
}

class NoSnapshotEnv final : public Environment {
 public:
  explicit NoSnapshotEnv(std::shared_ptr<const Scenario> s) : inner_(std::move(s), "deceptive-01") {}
  const AxTree& observation() const override { return inner_.observation(); }
  const AxTree& step(const Action& a) override { return inner_.step(a); }
  bool terminated() const override { return inner_.terminated(); }
  std::optional<std::string> answer() const override { return inner_.answer(); }
  std::size_t executions() const override { return inner_.executions(); }

 private:
  SandboxEnv inner_;
};

TEST_F(DeceptiveSearch, WithoutSnapshotsDepthDegradesToOne) {
  NoSnapshotEnv env(scenario);
  SearchOptions options;
  options.width = 2;
  options.depth = 2;
  const SearchResult r = search_multistep(env, fresh(), scenario->task("deceptive-01").instruction, {},
                                          testing::scripted_config(), options);
  EXPECT_TRUE(r.degraded);
  EXPECT_EQ(r.env_steps, 1u);
  EXPECT_EQ(r.executed, std::vector<Action>{Action::click(2)});
}

}  // namespace
}  // namespace wma
