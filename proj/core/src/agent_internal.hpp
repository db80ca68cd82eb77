#pragma once

// Helpers shared by the episode loop and the search driver.

#include <memory>
#include <string>
#include <vector>

#include "wma/agent.hpp"

namespace wma::detail {

/// Result text recorded in the history after a real step.
std::string transition_note(const Backends& backends, const Instruction& instruction, const AxTree& before,
                            const AxTree& after, const Action& action, const AgentConfig& config);

/// Remembers ledger sizes so the calls of one episode can be split out.
class LedgerMark {
 public:
  explicit LedgerMark(const Backends& backends);
  CallLedger since() const;

 private:
  std::vector<std::shared_ptr<CallLedger>> ledgers_;
  std::vector<std::size_t> sizes_;
};

}  // namespace wma::detail
