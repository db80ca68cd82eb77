#include "wma/ledger.hpp"

#include <cstdio>
#include <iomanip>
#include <sstream>

#include "wma/error.hpp"

namespace wma {

std::string_view to_string(ModelRole role) noexcept {
  switch (role) {
    case ModelRole::policy: return "policy";
    case ModelRole::world: return "world";
    case ModelRole::value: return "value";
    case ModelRole::abstraction: return "abstraction";
    case ModelRole::judge: return "judge";
  }
  return "policy";
}

std::optional<ModelRole> model_role_from_string(std::string_view name) noexcept {
  for (ModelRole role : kAllModelRoles) {
    if (to_string(role) == name) return role;
  }
  return std::nullopt;
}

CallLedger::CallLedger(const CallLedger& other) {
  std::lock_guard lock(other.mutex_);
  records_ = other.records_;
  totals_ = other.totals_;
}

CallLedger& CallLedger::operator=(const CallLedger& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mutex_, other.mutex_);
  records_ = other.records_;
  totals_ = other.totals_;
  return *this;
}

void CallLedger::record(const CallRecord& call) {
  std::lock_guard lock(mutex_);
  records_.push_back(call);
  RoleTotals& t = totals_[call.role];
  ++t.calls;
  t.prompt_tokens += call.prompt_tokens;
  t.completion_tokens += call.completion_tokens;
  t.latency_ms += call.latency_ms;
}

void CallLedger::merge(const CallLedger& other) {
  for (const CallRecord& call : other.records()) record(call);
}

void CallLedger::clear() {
  std::lock_guard lock(mutex_);
  records_.clear();
  totals_.clear();
}

std::vector<CallRecord> CallLedger::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

RoleTotals CallLedger::totals(ModelRole role) const {
  std::lock_guard lock(mutex_);
  const auto it = totals_.find(role);
  return it == totals_.end() ? RoleTotals{} : it->second;
}

RoleTotals CallLedger::grand_total() const {
  std::lock_guard lock(mutex_);
  RoleTotals sum;
  for (const auto& [_, t] : totals_) {
    sum.calls += t.calls;
    sum.prompt_tokens += t.prompt_tokens;
    sum.completion_tokens += t.completion_tokens;
    sum.latency_ms += t.latency_ms;
  }
  return sum;
}

nlohmann::json CallLedger::to_json() const {
  nlohmann::json records = nlohmann::json::array();
  for (const CallRecord& r : this->records()) {
    records.push_back({{"role", to_string(r.role)},
                       {"prompt_tokens", r.prompt_tokens},
                       {"completion_tokens", r.completion_tokens},
                       {"latency_ms", r.latency_ms}});
  }
  nlohmann::json totals = nlohmann::json::object();
  for (ModelRole role : kAllModelRoles) {
    const RoleTotals t = this->totals(role);
    totals[std::string(to_string(role))] = {{"calls", t.calls},
                                           {"prompt_tokens", t.prompt_tokens},
                                           {"completion_tokens", t.completion_tokens},
                                           {"latency_ms", t.latency_ms}};
  }
  return {{"records", records}, {"totals", totals}};
}

CallLedger CallLedger::from_json(const nlohmann::json& j) {
  CallLedger ledger;
  if (!j.contains("records") || !j.at("records").is_array()) throw ConfigError("/records", "expected an array");
  for (const auto& r : j.at("records")) {
    const auto role = model_role_from_string(r.at("role").get<std::string>());
    if (!role) throw ConfigError("/records/role", "unknown role '" + r.at("role").get<std::string>() + "'");
    ledger.record({*role, r.value("prompt_tokens", std::int64_t{0}), r.value("completion_tokens", std::int64_t{0}),
                   r.value("latency_ms", std::int64_t{0})});
  }
  return ledger;
}

PriceTable::Price PriceTable::price_for(ModelRole role) const {
  const auto it = per_role.find(role);
  return it == per_role.end() ? fallback : it->second;
}

namespace {

PriceTable::Price price_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  PriceTable::Price price;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number() || value.get<double>() < 0) throw ConfigError(path + "/" + key, "expected a non-negative number");
    if (key == "prompt") {
      price.prompt = value.get<double>();
    } else if (key == "completion") {
      price.completion = value.get<double>();
    } else {
      throw ConfigError(path + "/" + key, "unknown key");
    }
  }
  return price;
}

std::string format_fixed(double value, int precision) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(precision) << value;
  return out.str();
}

}  // namespace

PriceTable PriceTable::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("", "price table must be an object");
  PriceTable table;
  for (const auto& [key, value] : j.items()) {
    if (key == "default") {
      table.fallback = price_from_json(value, "/default");
    } else if (key == "roles") {
      if (!value.is_object()) throw ConfigError("/roles", "expected an object");
      for (const auto& [role_name, price] : value.items()) {
        const auto role = model_role_from_string(role_name);
        if (!role) throw ConfigError("/roles/" + role_name, "unknown role");
        table.per_role[*role] = price_from_json(price, "/roles/" + role_name);
      }
    } else {
      throw ConfigError("/" + key, "unknown key");
    }
  }
  return table;
}

nlohmann::json PriceTable::to_json() const {
  nlohmann::json roles = nlohmann::json::object();
  for (const auto& [role, price] : per_role) {
    roles[std::string(to_string(role))] = {{"prompt", price.prompt}, {"completion", price.completion}};
  }
  return {{"default", {{"prompt", fallback.prompt}, {"completion", fallback.completion}}}, {"roles", roles}};
}

LedgerReport ledger_report(const CallLedger& ledger, const PriceTable& prices, std::size_t episodes) {
  LedgerReport report;
  nlohmann::json rows = nlohmann::json::array();
  RoleTotals total;
  double total_cost = 0.0;

  std::ostringstream text;
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %8s %14s %18s %12s %12s\n", "role", "calls", "prompt_tokens",
                "completion_tokens", "time_s", "cost_usd");
  text << line;

  auto emit = [&](const std::string& name, const RoleTotals& t, double cost) {
    const double seconds = static_cast<double>(t.latency_ms) / 1000.0;
    rows.push_back({{"role", name},
                    {"calls", t.calls},
                    {"prompt_tokens", t.prompt_tokens},
                    {"completion_tokens", t.completion_tokens},
                    {"time_s", seconds},
                    {"cost_usd", cost}});
    std::snprintf(line, sizeof line, "%-12s %8lld %14lld %18lld %12s %12s\n", name.c_str(),
                  static_cast<long long>(t.calls), static_cast<long long>(t.prompt_tokens),
                  static_cast<long long>(t.completion_tokens), format_fixed(seconds, 3).c_str(),
                  format_fixed(cost, 6).c_str());
    text << line;
  };

  for (ModelRole role : kAllModelRoles) {
    const RoleTotals t = ledger.totals(role);
    const PriceTable::Price price = prices.price_for(role);
    const double cost = static_cast<double>(t.prompt_tokens) * price.prompt +
                        static_cast<double>(t.completion_tokens) * price.completion;
    emit(std::string(to_string(role)), t, cost);
    total.calls += t.calls;
    total.prompt_tokens += t.prompt_tokens;
    total.completion_tokens += t.completion_tokens;
    total.latency_ms += t.latency_ms;
    total_cost += cost;
  }
  emit("total", total, total_cost);

  report.json = {{"rows", rows},
                 {"total", {{"calls", total.calls},
                            {"prompt_tokens", total.prompt_tokens},
                            {"completion_tokens", total.completion_tokens},
                            {"time_s", static_cast<double>(total.latency_ms) / 1000.0},
                            {"cost_usd", total_cost}}}};
  if (episodes > 0) {
    const double per_cost = total_cost / static_cast<double>(episodes);
    const double per_time = static_cast<double>(total.latency_ms) / 1000.0 / static_cast<double>(episodes);
    report.json["episodes"] = episodes;
    report.json["per_episode"] = {{"cost_usd", per_cost}, {"time_s", per_time}};
    text << "per episode (" << episodes << "): cost_usd " << format_fixed(per_cost, 6) << ", time_s "
         << format_fixed(per_time, 3) << "\n";
  }
  report.text = text.str();
  return report;
}

}  // namespace wma
