#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wma/diff.hpp"
#include "wma/eval.hpp"
#include "wma/gateway.hpp"
#include "wma/sandbox.hpp"

namespace wma {

/// Shape of a generated oracle script for a scenario.
struct OracleOptions {
  /// Policy replies per (task, page) on the gold path. The distractors
  /// outnumber the gold action so that a frequency vote picks a no-op.
  std::size_t scroll_replies = 8;
  std::size_t gold_replies = 7;
  std::size_t hover_replies = 5;
  /// Value replies: 1.0 for gold and 0.0 otherwise, or one constant score.
  bool constant_value = false;
  double constant_score = 0.5;
};

/// Scripted policy, world-model and value replies for every task of a
/// scenario. The world model answers with the true transition of the
/// sandbox rendered as delta text; the value model knows the gold path.
/// Throws InvalidArgument if a gold path revisits a page or leaves the
/// scenario.
MockScript build_oracle_script(const Scenario& scenario, const OracleOptions& options = {},
                               const MatchWeights& weights = {});

/// Always answers next-state questions correctly.
MockScript build_mcq_oracle_script(const std::vector<McqItem>& items);

/// Always picks the gold action.
MockScript build_selection_oracle_script(const std::vector<SelectionItem>& items, bool with_next_state);

/// Answers every next-state question with a seeded coin flip.
MockScript build_coin_flip_script(std::uint64_t seed);

/// Picks one of `choices` selection answers uniformly at random.
MockScript build_uniform_selection_script(std::size_t choices, std::uint64_t seed);

}  // namespace wma
