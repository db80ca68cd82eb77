#pragma once

#include <string>

namespace wma {

/// A user instruction (the goal I the agent pursues).
struct Instruction {
  std::string id;
  std::string goal_text;
  std::string domain_tag;

  bool operator==(const Instruction&) const = default;
};

}  // namespace wma
