#include "ppm/policy.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "ppm/csv.hpp"
#include "ppm/errors.hpp"

namespace ppm {

namespace {

void check_tau(double tau, const std::string& what) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("policy: " + what + " must lie in [0,1]");
}

void check_kappa(int kappa) {
  if (kappa < 1) throw ConfigError("policy: kappa must be >= 1");
}

}  // namespace

void validate_policy(const Policy& policy) {
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, BasicPolicy>) {
          check_tau(p.tau, "tau");
        } else if constexpr (std::is_same_v<T, DelayedPolicy>) {
          check_tau(p.tau, "tau");
          check_kappa(p.kappa);
        } else if constexpr (std::is_same_v<T, IntervalsPolicy>) {
          if (p.splits.empty()) throw ConfigError("policy: intervals need at least one split");
          if (p.splits.front() != 1) throw ConfigError("policy: first interval must start at 1");
          for (std::size_t i = 1; i < p.splits.size(); ++i)
            if (p.splits[i] <= p.splits[i - 1])
              throw ConfigError("policy: interval starts must strictly increase");
          if (p.taus.size() != p.splits.size())
            throw ConfigError("policy: need exactly one tau per interval");
          for (double t : p.taus) check_tau(t, "interval tau");
          check_kappa(p.kappa);
        } else if constexpr (std::is_same_v<T, HierarchicalPolicy>) {
          if (p.order.first.empty() || p.order.second.empty() || p.order.first == p.order.second)
            throw ConfigError("policy: hierarchical needs two distinct alarm ids");
          if (p.tau_no_vs.size() != 2 || !p.tau_no_vs.count(p.order.first) ||
              !p.tau_no_vs.count(p.order.second))
            throw ConfigError("policy: tau_no_vs must cover exactly the two alarms");
          for (const auto& [id, tau] : p.tau_no_vs) check_tau(tau, "tau_no_vs[" + id + "]");
          check_tau(p.tau_pairwise, "tau_pairwise");
        } else {
          (void)p;  // Always / Never carry nothing to validate
        }
      },
      policy);
}

AlarmDecision decide_basic(const ProbabilitySeries& s, double tau, const std::string& alarm_id) {
  for (int k = 1; k <= s.n_prefixes(); ++k)
    if (s.probs[static_cast<std::size_t>(k) - 1] > tau) return fire(alarm_id, k);
  return no_alarm();
}

AlarmDecision decide_delayed(const ProbabilitySeries& s, double tau, int kappa,
                             const std::string& alarm_id) {
  int run = 0;
  for (int k = 1; k <= s.n_prefixes(); ++k) {
    run = s.probs[static_cast<std::size_t>(k) - 1] > tau ? run + 1 : 0;
    if (run >= kappa) return fire(alarm_id, k);
  }
  return no_alarm();
}

AlarmDecision decide_intervals(const ProbabilitySeries& s, const std::vector<int>& splits,
                               const std::vector<double>& taus, int kappa,
                               const std::string& alarm_id) {
  int run = 0;
  std::size_t interval = 0;
  for (int k = 1; k <= s.n_prefixes(); ++k) {
    while (interval + 1 < splits.size() && splits[interval + 1] <= k) ++interval;
    run = s.probs[static_cast<std::size_t>(k) - 1] > taus[interval] ? run + 1 : 0;
    if (run >= kappa) return fire(alarm_id, k);
  }
  return no_alarm();
}

AlarmDecision decide_hierarchical(const ProbabilitySeries& s, const HierarchicalPolicy& policy) {
  const std::string& low = policy.order.first;
  const std::string& high = policy.order.second;
  const double tau_low = policy.tau_no_vs.at(low);
  const double tau_high = policy.tau_no_vs.at(high);
  for (int k = 1; k <= s.n_prefixes(); ++k) {
    const double p = s.probs[static_cast<std::size_t>(k) - 1];
    const bool over_low = p > tau_low;
    const bool over_high = p > tau_high;
    if (!over_low && !over_high) continue;
    if (over_low != over_high) return fire(over_low ? low : high, k);
    return fire(p <= policy.tau_pairwise ? low : high, k);
  }
  return no_alarm();
}

AlarmDecision decide(const ProbabilitySeries& s, const Policy& policy) {
  return std::visit(
      [&](const auto& p) -> AlarmDecision {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, BasicPolicy>) {
          return decide_basic(s, p.tau, p.alarm_id);
        } else if constexpr (std::is_same_v<T, DelayedPolicy>) {
          return decide_delayed(s, p.tau, p.kappa, p.alarm_id);
        } else if constexpr (std::is_same_v<T, IntervalsPolicy>) {
          return decide_intervals(s, p.splits, p.taus, p.kappa, p.alarm_id);
        } else if constexpr (std::is_same_v<T, HierarchicalPolicy>) {
          return decide_hierarchical(s, p);
        } else if constexpr (std::is_same_v<T, AlwaysPolicy>) {
          return s.n_prefixes() >= 1 ? fire(p.alarm_id, 1) : no_alarm();
        } else {
          return no_alarm();
        }
      },
      policy);
}

std::map<std::string, AlarmDecision> apply_policy(const std::vector<ProbabilitySeries>& series,
                                                  const Policy& policy) {
  validate_policy(policy);
  std::map<std::string, AlarmDecision> out;
  for (const ProbabilitySeries& s : series) out[s.case_id] = decide(s, policy);
  return out;
}

namespace {

using nlohmann::json;

double get_tau(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ConfigError(std::string("policy: numeric '") + key + "' required");
  return j.at(key).get<double>();
}

}  // namespace

Policy policy_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("policy: invalid JSON: ") + e.what());
  }
  const std::string type = j.value("type", "");
  Policy policy;
  if (type == "basic") {
    policy = BasicPolicy{get_tau(j, "tau"), j.value("alarm_id", "a1")};
  } else if (type == "delayed") {
    policy = DelayedPolicy{get_tau(j, "tau"), j.value("kappa", 1), j.value("alarm_id", "a1")};
  } else if (type == "intervals") {
    IntervalsPolicy p;
    try {
      p.splits = j.at("splits").get<std::vector<int>>();
      p.taus = j.at("taus").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("policy: intervals need 'splits' and 'taus' arrays: ") + e.what());
    }
    p.kappa = j.value("kappa", 1);
    p.alarm_id = j.value("alarm_id", "a1");
    policy = p;
  } else if (type == "hierarchical") {
    HierarchicalPolicy p;
    if (!j.contains("low") || !j.contains("high"))
      throw ConfigError("policy: hierarchical needs 'low' and 'high' alarm ids");
    p.order = {j.at("low").get<std::string>(), j.at("high").get<std::string>()};
    if (!j.contains("tau_no_vs") || !j.at("tau_no_vs").is_object())
      throw ConfigError("policy: hierarchical needs a 'tau_no_vs' object");
    for (const auto& [id, tau] : j.at("tau_no_vs").items()) {
      if (!tau.is_number()) throw ConfigError("policy: tau_no_vs values must be numbers");
      p.tau_no_vs[id] = tau.get<double>();
    }
    p.tau_pairwise = get_tau(j, "tau_pairwise");
    policy = p;
  } else if (type == "always") {
    policy = AlwaysPolicy{j.value("alarm_id", "a1")};
  } else if (type == "never") {
    policy = NeverPolicy{};
  } else {
    throw ConfigError("policy: type must be basic|delayed|intervals|hierarchical|always|never");
  }
  validate_policy(policy);
  return policy;
}

Policy policy_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("policy: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return policy_from_json_text(ss.str());
}

std::string policy_to_json(const Policy& policy) {
  json j = std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        json out;
        if constexpr (std::is_same_v<T, BasicPolicy>) {
          out["type"] = "basic";
          out["tau"] = p.tau;
          out["alarm_id"] = p.alarm_id;
        } else if constexpr (std::is_same_v<T, DelayedPolicy>) {
          out["type"] = "delayed";
          out["tau"] = p.tau;
          out["kappa"] = p.kappa;
          out["alarm_id"] = p.alarm_id;
        } else if constexpr (std::is_same_v<T, IntervalsPolicy>) {
          out["type"] = "intervals";
          out["splits"] = p.splits;
          out["taus"] = p.taus;
          out["kappa"] = p.kappa;
          out["alarm_id"] = p.alarm_id;
        } else if constexpr (std::is_same_v<T, HierarchicalPolicy>) {
          out["type"] = "hierarchical";
          out["low"] = p.order.first;
          out["high"] = p.order.second;
          out["tau_no_vs"] = p.tau_no_vs;
          out["tau_pairwise"] = p.tau_pairwise;
        } else if constexpr (std::is_same_v<T, AlwaysPolicy>) {
          out["type"] = "always";
          out["alarm_id"] = p.alarm_id;
        } else {
          out["type"] = "never";
        }
        return out;
      },
      policy);
  return j.dump(2);
}

void write_decisions(const std::map<std::string, AlarmDecision>& decisions, std::ostream& out) {
  write_csv_row(out, std::vector<std::string>{"case_id", "alarm_id", "fired_at"});
  for (const auto& [case_id, d] : decisions) {
    write_csv_row(out, std::vector<std::string>{case_id, d.alarm_id.value_or(""),
                                                d.fired_at ? std::to_string(*d.fired_at) : ""});
  }
}

std::map<std::string, AlarmDecision> read_decisions(std::istream& in) {
  const CsvTable table = read_csv(in);
  const int case_col = table.column("case_id");
  const int alarm_col = table.column("alarm_id");
  const int fired_col = table.column("fired_at");
  if (case_col < 0 || alarm_col < 0 || fired_col < 0)
    throw DataError("decisions: header must be case_id,alarm_id,fired_at");

  std::map<std::string, AlarmDecision> out;
  for (const CsvRow& row : table.rows) {
    const std::string& case_id = row.fields[static_cast<std::size_t>(case_col)];
    const std::string& alarm = row.fields[static_cast<std::size_t>(alarm_col)];
    const std::string& fired = row.fields[static_cast<std::size_t>(fired_col)];
    if (out.count(case_id))
      throw DataError("decisions: line " + std::to_string(row.line) + ": duplicate case '" + case_id + "'");
    if (alarm.empty() != fired.empty())
      throw DataError("decisions: line " + std::to_string(row.line) +
                      ": alarm_id and fired_at must be both set or both empty");
    AlarmDecision d;
    if (!fired.empty()) {
      int k = 0;
      auto [ptr, ec] = std::from_chars(fired.data(), fired.data() + fired.size(), k);
      if (ec != std::errc{} || ptr != fired.data() + fired.size() || k < 1)
        throw DataError("decisions: line " + std::to_string(row.line) + ": bad fired_at '" + fired + "'");
      d = fire(alarm, k);
    }
    out[case_id] = d;
  }
  return out;
}

}  // namespace ppm
