#include <algorithm>
#include <cctype>
#include <charconv>
#include <random>
#include <set>

#include "wma/error.hpp"
#include "wma/eval.hpp"
#include "wma/similarity.hpp"

namespace wma {

namespace {

std::vector<ChatMessage> selection_messages(const SelectionItem& item, bool with_next_state,
                                            const PromptLibrary& prompts) {
  std::string choices;
  for (std::size_t i = 0; i < item.choices.size(); ++i) {
    if (i) choices += '\n';
    choices += std::to_string(i + 1) + ". " + item.choices[i];
    if (with_next_state && i < item.next_states.size()) {
      std::string state = item.next_states[i];
      std::replace(state.begin(), state.end(), '\n', ' ');
      choices += "\n   resulting state: " + state;
    }
  }
  return prompts.render(with_next_state ? "action_selection_next_state" : "action_selection",
                        {{"objective", item.objective}, {"observation", item.observation}, {"choices", choices}});
}

std::vector<ChatMessage> mcq_messages(const McqItem& item, const PromptLibrary& prompts) {
  return prompts.render("next_state_mcq", {{"objective", item.objective},
                                           {"observation", item.observation},
                                           {"action", item.action},
                                           {"choice_a", item.choices[0]},
                                           {"choice_b", item.choices[1]}});
}

}  // namespace

nlohmann::json to_json(const McqItem& item) {
  return {{"objective", item.objective},
          {"observation", item.observation},
          {"action", item.action},
          {"choices", item.choices},
          {"gold_index", item.gold_index},
          {"negative_similarity", item.negative_similarity}};
}

std::vector<McqItem> build_next_state_mcq(const std::vector<TransitionTuple>& trajectory, std::uint64_t seed) {
  // States of the trajectory in visiting order, without repeats.
  std::vector<std::string> states;
  auto add_state = [&](const std::string& s) {
    if (std::find(states.begin(), states.end(), s) == states.end()) states.push_back(s);
  };
  for (const TransitionTuple& t : trajectory) {
    add_state(t.observation);
    add_state(t.next_observation);
  }
  if (states.size() < 2) throw InsufficientStates("a trajectory needs at least two distinct observations");

  std::mt19937_64 rng(seed);
  std::vector<McqItem> items;
  for (const TransitionTuple& t : trajectory) {
    std::optional<std::size_t> negative;
    double best = -1.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (states[i] == t.next_observation) continue;
      const double ratio = similarity_ratio(t.next_observation, states[i]);
      if (ratio > best) {
        best = ratio;
        negative = i;
      }
    }
    McqItem item;
    item.objective = t.instruction.goal_text;
    item.observation = t.observation;
    item.action = t.action;
    item.negative_similarity = best;
    // Raw generator bits keep the shuffle identical across standard libraries.
    item.gold_index = static_cast<std::size_t>(rng() & 1U);
    item.choices[item.gold_index] = t.next_observation;
    item.choices[1 - item.gold_index] = states[*negative];
    items.push_back(std::move(item));
  }
  return items;
}

std::optional<std::size_t> parse_choice_letter(std::string_view reply) {
  std::string lower(reply);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  const std::size_t at = lower.find("answer:");
  if (at != std::string::npos) {
    std::size_t i = at + 7;
    while (i < lower.size() && std::isspace(static_cast<unsigned char>(lower[i]))) ++i;
    if (i < lower.size() && (lower[i] == 'a' || lower[i] == 'b')) {
      const bool boundary = i + 1 >= lower.size() || !std::isalnum(static_cast<unsigned char>(lower[i + 1]));
      if (boundary) return lower[i] == 'a' ? 0 : 1;
    }
  }
  for (std::size_t i = 0; i < reply.size(); ++i) {
    if (reply[i] != 'A' && reply[i] != 'B') continue;
    const bool left = i == 0 || !std::isalnum(static_cast<unsigned char>(reply[i - 1]));
    const bool right = i + 1 >= reply.size() || !std::isalnum(static_cast<unsigned char>(reply[i + 1]));
    if (left && right) return reply[i] == 'A' ? 0 : 1;
  }
  return std::nullopt;
}

std::optional<std::size_t> parse_choice_number(std::string_view reply, std::size_t count) {
  std::size_t i = 0;
  while (i < reply.size()) {
    if (!std::isdigit(static_cast<unsigned char>(reply[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < reply.size() && std::isdigit(static_cast<unsigned char>(reply[j]))) ++j;
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(reply.data() + i, reply.data() + j, value);
    if (ec == std::errc() && value >= 1 && value <= count) return value - 1;
    i = j;
  }
  return std::nullopt;
}

nlohmann::json HarnessReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const ItemOutcome& o : items) {
    rows.push_back({{"answer", o.answer ? nlohmann::json(*o.answer) : nlohmann::json(nullptr)},
                    {"correct", o.correct},
                    {"reply", o.reply}});
  }
  return {{"accuracy", accuracy}, {"correct", correct}, {"total", items.size()}, {"unparseable", unparseable},
          {"items", rows}};
}

namespace {

void finish(HarnessReport& report) {
  report.accuracy =
      report.items.empty() ? 0.0 : static_cast<double>(report.correct) / static_cast<double>(report.items.size());
}

}  // namespace

std::string mcq_user_prompt(const McqItem& item, const PromptLibrary& prompts) {
  return mcq_messages(item, prompts).back().content;
}

HarnessReport run_mcq_eval(const std::vector<McqItem>& items, const ModelClient& model, const PromptLibrary& prompts) {
  HarnessReport report;
  for (const McqItem& item : items) {
    const ChatResponse response = model.complete(model.make_request(mcq_messages(item, prompts)));
    ItemOutcome outcome;
    outcome.reply = response.choices.empty() ? "" : response.choices.front();
    outcome.answer = parse_choice_letter(outcome.reply);
    if (!outcome.answer) ++report.unparseable;
    outcome.correct = outcome.answer == item.gold_index;
    if (outcome.correct) ++report.correct;
    report.items.push_back(std::move(outcome));
  }
  finish(report);
  return report;
}

nlohmann::json to_json(const SelectionItem& item) {
  return {{"objective", item.objective},
          {"observation", item.observation},
          {"choices", item.choices},
          {"next_states", item.next_states},
          {"gold_index", item.gold_index}};
}

SelectionItem make_selection_item(std::string objective, std::string observation, std::string gold,
                                  std::vector<std::string> negatives, std::uint64_t seed,
                                  std::vector<std::string> next_states) {
  if (!next_states.empty() && next_states.size() != negatives.size() + 1) {
    throw InvalidArgument("next_states must hold the gold state followed by one state per negative");
  }
  SelectionItem item;
  item.objective = std::move(objective);
  item.observation = std::move(observation);
  std::mt19937_64 rng(seed);
  const std::size_t total = negatives.size() + 1;
  item.gold_index = static_cast<std::size_t>(rng() % total);
  std::size_t next_negative = 0;
  for (std::size_t i = 0; i < total; ++i) {
    if (i == item.gold_index) {
      item.choices.push_back(gold);
      if (!next_states.empty()) item.next_states.push_back(next_states[0]);
    } else {
      item.choices.push_back(negatives[next_negative]);
      if (!next_states.empty()) item.next_states.push_back(next_states[next_negative + 1]);
      ++next_negative;
    }
  }
  return item;
}

std::vector<std::string> generate_negative_actions(const ModelClient& model, const std::string& objective,
                                                   const std::string& observation, const std::string& gold,
                                                   std::size_t count, const PromptLibrary& prompts) {
  const ChatResponse response = model.complete(model.make_request(
      prompts.render("negative_actions", {{"objective", objective},
                                          {"observation", observation},
                                          {"gold_action", gold},
                                          {"count", std::to_string(count)}})));
  std::vector<std::string> out;
  std::set<std::string> seen = {gold};
  for (const std::string& choice : response.choices) {
    std::size_t start = 0;
    while (start < choice.size() && out.size() < count) {
      std::size_t end = choice.find('\n', start);
      if (end == std::string::npos) end = choice.size();
      std::string line = normalize_whitespace(std::string_view(choice).substr(start, end - start));
      start = end + 1;
      // Tolerate list markers such as "3." in front of the action.
      const std::size_t marker = line.find_first_not_of("0123456789.)-* ");
      if (marker != std::string::npos && marker > 0 && line.find('[') > marker) line = line.substr(marker);
      try {
        const std::string canonical = render_action(parse_action(line));
        if (seen.insert(canonical).second) out.push_back(canonical);
      } catch (const UnparseableAction&) {
      }
    }
  }
  return out;
}

std::string selection_user_prompt(const SelectionItem& item, bool with_next_state, const PromptLibrary& prompts) {
  return selection_messages(item, with_next_state, prompts).back().content;
}

HarnessReport run_action_selection_eval(const std::vector<SelectionItem>& items, const ModelClient& model,
                                        bool with_next_state, const PromptLibrary& prompts) {
  if (with_next_state) {
    for (const SelectionItem& item : items) {
      if (item.next_states.size() != item.choices.size()) {
        throw InvalidArgument("next-state selection needs one resulting state per choice");
      }
    }
  }
  HarnessReport report;
  for (const SelectionItem& item : items) {
    const ChatResponse response = model.complete(model.make_request(selection_messages(item, with_next_state, prompts)));
    ItemOutcome outcome;
    outcome.reply = response.choices.empty() ? "" : response.choices.front();
    outcome.answer = parse_choice_number(outcome.reply, item.choices.size());
    if (!outcome.answer) ++report.unparseable;
    outcome.correct = outcome.answer == item.gold_index;
    if (outcome.correct) ++report.correct;
    report.items.push_back(std::move(outcome));
  }
  finish(report);
  return report;
}

}  // namespace wma
