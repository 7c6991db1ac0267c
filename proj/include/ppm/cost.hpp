#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ppm/series.hpp"

namespace ppm {

// One member of the cost-function families. The non-monotonic family is
// base * (1 - min(cap, k-1) / div): flat for the first event, falling until
// k-1 reaches cap, flat again after. Both non-monotonic cost slots share
// this shape, only their constants differ.
enum class CostFamily { Constant, Linear, NonMonotonic };

struct CostFnSpec {
  CostFamily family = CostFamily::Constant;
  double base = 0.0;
  int nm_cap = 0;  // cap on k-1
  int nm_div = 1;  // divisor

  bool operator==(const CostFnSpec&) const = default;
};

inline CostFnSpec constant_cost(double base) { return {CostFamily::Constant, base, 0, 1}; }
inline CostFnSpec linear_cost(double base) { return {CostFamily::Linear, base, 0, 1}; }
inline CostFnSpec non_monotonic_cost(double base, int cap, int div) {
  return {CostFamily::NonMonotonic, base, cap, div};
}

// Mitigation effectiveness of an alarm raised after k of trace_len events.
enum class EffFamily { Constant, LinearDecay, NonMonotonic };

struct EffSpec {
  EffFamily family = EffFamily::Constant;
  double value = 1.0;  // Constant only
  int nm_cap = 0;      // non-monotonic: 1 - min(cap, k-1) / div
  int nm_div = 1;

  bool operator==(const EffSpec&) const = default;
};

inline EffSpec constant_eff(double v) { return {EffFamily::Constant, v, 0, 1}; }
inline EffSpec linear_decay_eff() { return {EffFamily::LinearDecay, 1.0, 0, 1}; }
inline EffSpec non_monotonic_eff(int cap, int div) { return {EffFamily::NonMonotonic, 1.0, cap, div}; }

struct AlarmModel {
  CostFnSpec c_in;
  CostFnSpec c_com;
  EffSpec eff;

  bool operator==(const AlarmModel&) const = default;
};

// Alarm catalogue plus the cost of letting an undesired outcome happen.
// Alarm order is the escalation order used by hierarchical policies.
struct MultiAlarmCostModel {
  std::vector<std::pair<std::string, AlarmModel>> alarms;
  CostFnSpec c_out;

  const AlarmModel* find(const std::string& alarm_id) const;
  void validate() const;  // >= 1 alarm, unique ids; throws ConfigError

  bool operator==(const MultiAlarmCostModel&) const = default;
};

inline MultiAlarmCostModel single_alarm_model(AlarmModel alarm, CostFnSpec c_out,
                                              std::string id = "a1") {
  return MultiAlarmCostModel{{{std::move(id), std::move(alarm)}}, c_out};
}

// What happened to one case: which alarm fired after how many events, or
// nothing at all. Alarms fire at most once per case.
struct AlarmDecision {
  std::optional<std::string> alarm_id;
  std::optional<int> fired_at;  // 1-based prefix length

  bool fired() const { return fired_at.has_value(); }

  bool operator==(const AlarmDecision&) const = default;
};

inline AlarmDecision no_alarm() { return {}; }
inline AlarmDecision fire(std::string alarm_id, int k) { return {std::move(alarm_id), k}; }

double eval_cost_fn(const CostFnSpec& spec, int k, int trace_len);
double eval_eff(const EffSpec& spec, int k, int trace_len);

// Table of case outcomes versus alarm decisions:
//   undesired & fired   -> c_in(k) + (1 - eff(k)) * c_out
//   desired   & fired   -> c_in(k) + c_com(k)
//   undesired & unfired -> c_out
//   desired   & unfired -> 0
// c_out is evaluated at the full trace length.
double case_cost(int trace_len, bool undesired, const AlarmDecision& decision,
                 const MultiAlarmCostModel& model);

struct CostSummary {
  double total = 0.0;
  double avg_per_case = 0.0;
};

CostSummary total_cost(const std::vector<ProbabilitySeries>& cases,
                       const std::map<std::string, AlarmDecision>& decisions,
                       const MultiAlarmCostModel& model);

MultiAlarmCostModel cost_model_from_json_text(const std::string& text);
MultiAlarmCostModel cost_model_from_json_file(const std::string& path);
std::string cost_model_to_json(const MultiAlarmCostModel& model);

}  // namespace ppm
