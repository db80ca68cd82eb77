#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "wma/action.hpp"
#include "wma/ax_tree.hpp"

namespace wma {

/// Opaque saved environment state. Only the environment that produced a
/// snapshot can restore it, and only within the same generation.
struct EnvSnapshot {
  std::uint64_t generation = 0;
  nlohmann::json state;
};

/// A web environment the agent acts in. One instance is single-threaded.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const AxTree& observation() const = 0;
  /// Executes one action. Throws EpisodeAlreadyTerminated after a stop.
  virtual const AxTree& step(const Action& action) = 0;
  virtual bool terminated() const = 0;
  /// Answer carried by the terminating action, if any.
  virtual std::optional<std::string> answer() const = 0;
  /// Number of step() calls since the episode started. Restores do not
  /// rewind it.
  virtual std::size_t executions() const = 0;

  /// Environments without snapshot support throw SnapshotUnsupported.
  virtual EnvSnapshot snapshot() const;
  virtual void restore(const EnvSnapshot& snapshot);
};

}  // namespace wma
