#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <sstream>

#include "wma/error.hpp"
#include "wma/eval.hpp"
#include "wma/similarity.hpp"

namespace wma {

namespace {

std::vector<std::string> whitespace_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::istringstream in{std::string(text)};
  for (std::string token; in >> token;) tokens.push_back(token);
  return tokens;
}

double mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

std::string metric_action_text(const Action& action) {
  if (action.kind != ActionKind::type) return render_action(action);
  return "type [" + std::to_string(*action.target) + "] [" + *action.text + "]";
}

double token_f1(std::string_view predicted, std::string_view gold) {
  const auto p = whitespace_tokens(predicted);
  const auto g = whitespace_tokens(gold);
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  std::map<std::string, std::size_t> counts;
  for (const auto& t : g) ++counts[t];
  std::size_t common = 0;
  for (const auto& t : p) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(p.size());
  const double recall = static_cast<double>(common) / static_cast<double>(g.size());
  return 2.0 * precision * recall / (precision + recall);
}

StepJudgment judge_step(const Action& predicted, const GoldStep& gold) {
  StepJudgment j;
  std::vector<std::int64_t> elements = gold.elements;
  if (elements.empty() && gold.action.target) elements.push_back(*gold.action.target);
  if (elements.empty()) {
    j.element_correct = !predicted.target.has_value();
  } else {
    j.element_correct = predicted.target &&
                        std::find(elements.begin(), elements.end(), *predicted.target) != elements.end();
  }
  j.action_f1 = token_f1(metric_action_text(predicted), metric_action_text(gold.action));
  const double argument_f1 = token_f1(predicted.text.value_or(""), gold.action.text.value_or(""));
  j.step_success = j.element_correct && predicted.kind == gold.action.kind && argument_f1 == 1.0;
  return j;
}

TaskJudgment judge_task(const TaskPrediction& prediction) {
  TaskJudgment task;
  task.task_id = prediction.task_id;
  std::vector<double> ea, f1, ssr;
  for (std::size_t i = 0; i < prediction.gold.size(); ++i) {
    StepJudgment j;
    if (i < prediction.predicted.size()) {
      j = judge_step(prediction.predicted[i], prediction.gold[i]);
    } else {
      j.missing = true;
    }
    ea.push_back(j.element_correct ? 1.0 : 0.0);
    f1.push_back(j.action_f1);
    ssr.push_back(j.step_success ? 1.0 : 0.0);
    task.steps.push_back(j);
  }
  if (prediction.predicted.size() < prediction.gold.size()) task.flags.emplace_back("missing_steps");
  if (prediction.predicted.size() > prediction.gold.size()) task.flags.emplace_back("extra_steps");
  task.element_accuracy = mean(ea);
  task.action_f1 = mean(f1);
  task.step_success_rate = mean(ssr);
  task.success = !task.steps.empty() && std::all_of(task.steps.begin(), task.steps.end(),
                                                    [](const StepJudgment& s) { return s.step_success; });
  return task;
}

MetricsReport compute_metrics(const std::vector<TaskPrediction>& predictions) {
  MetricsReport report;
  std::vector<double> ea, f1, ssr, sr;
  for (const TaskPrediction& p : predictions) {
    TaskJudgment task = judge_task(p);
    ea.push_back(task.element_accuracy);
    f1.push_back(task.action_f1);
    ssr.push_back(task.step_success_rate);
    sr.push_back(task.success ? 1.0 : 0.0);
    report.tasks.push_back(std::move(task));
  }
  report.element_accuracy = mean(ea);
  report.action_f1 = mean(f1);
  report.step_success_rate = mean(ssr);
  report.success_rate = mean(sr);
  return report;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json tasks_json = nlohmann::json::array();
  for (const TaskJudgment& t : tasks) {
    nlohmann::json steps = nlohmann::json::array();
    for (const StepJudgment& s : t.steps) {
      steps.push_back({{"element_correct", s.element_correct},
                       {"action_f1", s.action_f1},
                       {"step_success", s.step_success},
                       {"missing", s.missing}});
    }
    tasks_json.push_back({{"task_id", t.task_id},
                          {"element_accuracy", t.element_accuracy},
                          {"action_f1", t.action_f1},
                          {"step_success_rate", t.step_success_rate},
                          {"success", t.success},
                          {"flags", t.flags},
                          {"steps", steps}});
  }
  return {{"element_accuracy", element_accuracy},
          {"action_f1", action_f1},
          {"step_success_rate", step_success_rate},
          {"success_rate", success_rate},
          {"tasks", tasks_json}};
}

std::string MetricsReport::to_text() const {
  std::string out;
  char line[200];
  std::snprintf(line, sizeof line, "%-24s %8s %8s %8s %8s\n", "task", "EA", "AF1", "StepSR", "SR");
  out += line;
  for (const TaskJudgment& t : tasks) {
    std::snprintf(line, sizeof line, "%-24s %8.4f %8.4f %8.4f %8.4f\n", t.task_id.c_str(), t.element_accuracy,
                  t.action_f1, t.step_success_rate, t.success ? 1.0 : 0.0);
    out += line;
  }
  std::snprintf(line, sizeof line, "%-24s %8.4f %8.4f %8.4f %8.4f\n", "macro", element_accuracy, action_f1,
                step_success_rate, success_rate);
  out += line;
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    std::string s = normalize_whitespace(current);
    if (!s.empty()) out.push_back(std::move(s));
    current.clear();
  };
  for (char c : text) {
    if (c == '.' || c == '!' || c == '?' || c == '\n') {
      flush();
    } else {
      current += c;
    }
  }
  flush();
  return out;
}

CoverageResult coverage_score(std::string_view predicted, std::string_view gold, const ModelClient* judge,
                              const PromptLibrary& prompts) {
  const std::vector<std::string> gold_sentences = split_sentences(gold);
  if (gold_sentences.empty()) throw InvalidArgument("coverage is undefined for a gold text without sentences");
  const std::vector<std::string> predicted_sentences = split_sentences(predicted);
  CoverageResult result;
  result.total = gold_sentences.size();
  for (const std::string& sentence : gold_sentences) {
    bool covered = false;
    if (judge != nullptr) {
      const ChatResponse response = judge->complete(judge->make_request(
          prompts.render("coverage_judge", {{"sentence", sentence}, {"prediction", std::string(predicted)}})));
      if (!response.choices.empty()) {
        std::string reply = normalize_whitespace(response.choices.front());
        for (char& c : reply) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        covered = reply.rfind("yes", 0) == 0;
      }
    } else {
      covered = std::any_of(predicted_sentences.begin(), predicted_sentences.end(), [&](const std::string& p) {
        return similarity_ratio(sentence, p) >= kLexicalCoverageThreshold;
      });
    }
    if (covered) ++result.covered;
  }
  result.score = static_cast<double>(result.covered) / static_cast<double>(result.total);
  return result;
}

}  // namespace wma
