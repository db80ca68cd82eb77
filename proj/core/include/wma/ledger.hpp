#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace wma {

enum class ModelRole { policy, world, value, abstraction, judge };

inline constexpr std::array<ModelRole, 5> kAllModelRoles = {ModelRole::policy, ModelRole::world, ModelRole::value,
                                                           ModelRole::abstraction, ModelRole::judge};

std::string_view to_string(ModelRole role) noexcept;
std::optional<ModelRole> model_role_from_string(std::string_view name) noexcept;

struct CallRecord {
  ModelRole role = ModelRole::policy;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t latency_ms = 0;

  bool operator==(const CallRecord&) const = default;
};

struct RoleTotals {
  std::int64_t calls = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t latency_ms = 0;

  bool operator==(const RoleTotals&) const = default;
};

/// Thread-safe accounting of model calls per role. Totals are kept in step
/// with the per-call records under one lock.
class CallLedger {
 public:
  CallLedger() = default;
  CallLedger(const CallLedger& other);
  CallLedger& operator=(const CallLedger& other);

  void record(const CallRecord& call);
  void merge(const CallLedger& other);
  void clear();

  std::vector<CallRecord> records() const;
  RoleTotals totals(ModelRole role) const;
  RoleTotals grand_total() const;
  std::int64_t calls(ModelRole role) const { return totals(role).calls; }

  nlohmann::json to_json() const;
  static CallLedger from_json(const nlohmann::json& j);

 private:
  mutable std::mutex mutex_;
  std::vector<CallRecord> records_;
  std::map<ModelRole, RoleTotals> totals_;
};

/// Per-token prices, supplied by the user. Nothing is hardcoded.
struct PriceTable {
  struct Price {
    double prompt = 0.0;
    double completion = 0.0;
  };
  Price fallback;
  std::map<ModelRole, Price> per_role;

  Price price_for(ModelRole role) const;

  /// {"default": {"prompt": p, "completion": c}, "roles": {"world": {...}}}
  static PriceTable from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct LedgerReport {
  nlohmann::json json;
  std::string text;
};

/// Per-role and total calls, tokens, wall time and estimated cost, laid out
/// like a cost/time comparison table. `episodes` > 0 adds per-episode rows.
LedgerReport ledger_report(const CallLedger& ledger, const PriceTable& prices, std::size_t episodes = 0);

}  // namespace wma
