#include "ppm/cost.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ppm/errors.hpp"

namespace ppm {

const AlarmModel* MultiAlarmCostModel::find(const std::string& alarm_id) const {
  for (const auto& [id, alarm] : alarms)
    if (id == alarm_id) return &alarm;
  return nullptr;
}

void MultiAlarmCostModel::validate() const {
  if (alarms.empty()) throw ConfigError("cost model: needs at least one alarm");
  std::set<std::string> ids;
  for (const auto& [id, alarm] : alarms) {
    if (id.empty()) throw ConfigError("cost model: empty alarm id");
    if (!ids.insert(id).second) throw ConfigError("cost model: duplicate alarm id '" + id + "'");
    if (alarm.eff.family == EffFamily::Constant &&
        (alarm.eff.value < 0.0 || alarm.eff.value > 1.0))
      throw ConfigError("cost model: constant eff must lie in [0,1]");
  }
}

namespace {

void check_k(int k, int trace_len) {
  if (trace_len < 1) throw ConfigError("cost: trace length must be positive");
  if (k < 1 || k > trace_len)
    throw ConfigError("cost: prefix index " + std::to_string(k) + " outside 1.." +
                      std::to_string(trace_len));
}

}  // namespace

double eval_cost_fn(const CostFnSpec& spec, int k, int trace_len) {
  check_k(k, trace_len);
  double v = 0.0;
  switch (spec.family) {
    case CostFamily::Constant:
      v = spec.base;
      break;
    case CostFamily::Linear:
      v = spec.base * static_cast<double>(k) / static_cast<double>(trace_len);
      break;
    case CostFamily::NonMonotonic:
      v = spec.base *
          (1.0 - static_cast<double>(std::min(spec.nm_cap, k - 1)) / static_cast<double>(spec.nm_div));
      break;
  }
  return std::max(v, 0.0);
}

double eval_eff(const EffSpec& spec, int k, int trace_len) {
  check_k(k, trace_len);
  double v = 1.0;
  switch (spec.family) {
    case EffFamily::Constant:
      v = spec.value;
      break;
    case EffFamily::LinearDecay:
      v = 1.0 - static_cast<double>(k) / static_cast<double>(trace_len);
      break;
    case EffFamily::NonMonotonic:
      v = 1.0 - static_cast<double>(std::min(spec.nm_cap, k - 1)) / static_cast<double>(spec.nm_div);
      break;
  }
  return std::clamp(v, 0.0, 1.0);
}

double case_cost(int trace_len, bool undesired, const AlarmDecision& decision,
                 const MultiAlarmCostModel& model) {
  const double out_cost = eval_cost_fn(model.c_out, trace_len, trace_len);
  if (!decision.fired()) return undesired ? out_cost : 0.0;

  if (!decision.alarm_id) throw DataError("decision: fired_at without alarm_id");
  const AlarmModel* alarm = model.find(*decision.alarm_id);
  if (!alarm) throw DataError("decision: unknown alarm id '" + *decision.alarm_id + "'");
  const int k = *decision.fired_at;
  if (k < 1 || k > trace_len)
    throw DataError("decision: fired_at " + std::to_string(k) + " outside trace of length " +
                    std::to_string(trace_len));

  const double c_in = eval_cost_fn(alarm->c_in, k, trace_len);
  if (undesired) return c_in + (1.0 - eval_eff(alarm->eff, k, trace_len)) * out_cost;
  return c_in + eval_cost_fn(alarm->c_com, k, trace_len);
}

CostSummary total_cost(const std::vector<ProbabilitySeries>& cases,
                       const std::map<std::string, AlarmDecision>& decisions,
                       const MultiAlarmCostModel& model) {
  if (cases.empty()) throw DataError("total_cost: no cases");
  CostSummary s;
  for (const ProbabilitySeries& c : cases) {
    auto it = decisions.find(c.case_id);
    if (it == decisions.end()) throw DataError("total_cost: no decision for case '" + c.case_id + "'");
    s.total += case_cost(c.trace_len, c.outcome, it->second, model);
  }
  s.avg_per_case = s.total / static_cast<double>(cases.size());
  return s;
}

namespace {

using nlohmann::json;

// Each slot reads its own constants letters from the shared table; "cap" and
// "div" are accepted everywhere.
CostFnSpec cost_fn_from_json(const json& j, const char* cap_letter, const char* div_letter,
                             const std::string& where) {
  if (!j.is_object()) throw ConfigError("cost model: " + where + " must be an object");
  CostFnSpec spec;
  const std::string family = j.value("family", "");
  if (family == "constant")
    spec.family = CostFamily::Constant;
  else if (family == "linear")
    spec.family = CostFamily::Linear;
  else if (family == "non_monotonic")
    spec.family = CostFamily::NonMonotonic;
  else
    throw ConfigError("cost model: " + where + ": family must be constant|linear|non_monotonic");

  if (!j.contains("base") || !j.at("base").is_number())
    throw ConfigError("cost model: " + where + ": numeric 'base' required");
  spec.base = j.at("base").get<double>();
  if (spec.base < 0.0) throw ConfigError("cost model: " + where + ": base must be >= 0");

  if (spec.family == CostFamily::NonMonotonic) {
    const json& c = j.contains("constants") ? j.at("constants") : j;
    auto read_int = [&](const char* primary, const char* alias) {
      if (c.contains(primary)) return c.at(primary).get<int>();
      if (c.contains(alias)) return c.at(alias).get<int>();
      throw ConfigError("cost model: " + where + ": non_monotonic needs '" + primary + "' (or '" +
                        alias + "')");
    };
    spec.nm_cap = read_int(cap_letter, "cap");
    spec.nm_div = read_int(div_letter, "div");
    if (spec.nm_cap < 0) throw ConfigError("cost model: " + where + ": cap must be >= 0");
    if (spec.nm_div <= 0) throw ConfigError("cost model: " + where + ": divisor must be > 0");
  }
  return spec;
}

EffSpec eff_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError("cost model: " + where + " must be an object");
  EffSpec spec;
  const std::string family = j.value("family", "");
  if (family == "constant") {
    spec.family = EffFamily::Constant;
    if (!j.contains("value") || !j.at("value").is_number())
      throw ConfigError("cost model: " + where + ": constant eff needs numeric 'value'");
    spec.value = j.at("value").get<double>();
    if (spec.value < 0.0 || spec.value > 1.0)
      throw ConfigError("cost model: " + where + ": eff value must lie in [0,1]");
  } else if (family == "linear_decay") {
    spec.family = EffFamily::LinearDecay;
  } else if (family == "non_monotonic") {
    spec.family = EffFamily::NonMonotonic;
    const json& c = j.contains("constants") ? j.at("constants") : j;
    auto read_int = [&](const char* primary, const char* alias) {
      if (c.contains(primary)) return c.at(primary).get<int>();
      if (c.contains(alias)) return c.at(alias).get<int>();
      throw ConfigError("cost model: " + where + ": non_monotonic eff needs '" + primary +
                        "' (or '" + alias + "')");
    };
    spec.nm_cap = read_int("e", "cap");
    spec.nm_div = read_int("f", "div");
    if (spec.nm_cap < 0) throw ConfigError("cost model: " + where + ": cap must be >= 0");
    if (spec.nm_div <= 0) throw ConfigError("cost model: " + where + ": divisor must be > 0");
  } else {
    throw ConfigError("cost model: " + where + ": family must be constant|linear_decay|non_monotonic");
  }
  return spec;
}

AlarmModel alarm_from_json(const json& j, const std::string& where) {
  AlarmModel alarm;
  for (const char* key : {"c_in", "c_com", "eff"})
    if (!j.contains(key)) throw ConfigError("cost model: " + where + ": missing '" + key + "'");
  alarm.c_in = cost_fn_from_json(j.at("c_in"), "a", "b", where + ".c_in");
  alarm.c_com = cost_fn_from_json(j.at("c_com"), "c", "d", where + ".c_com");
  alarm.eff = eff_from_json(j.at("eff"), where + ".eff");
  return alarm;
}

json cost_fn_to_json(const CostFnSpec& spec) {
  json j;
  j["base"] = spec.base;
  switch (spec.family) {
    case CostFamily::Constant: j["family"] = "constant"; break;
    case CostFamily::Linear: j["family"] = "linear"; break;
    case CostFamily::NonMonotonic:
      j["family"] = "non_monotonic";
      j["cap"] = spec.nm_cap;
      j["div"] = spec.nm_div;
      break;
  }
  return j;
}

json eff_to_json(const EffSpec& spec) {
  json j;
  switch (spec.family) {
    case EffFamily::Constant:
      j["family"] = "constant";
      j["value"] = spec.value;
      break;
    case EffFamily::LinearDecay: j["family"] = "linear_decay"; break;
    case EffFamily::NonMonotonic:
      j["family"] = "non_monotonic";
      j["cap"] = spec.nm_cap;
      j["div"] = spec.nm_div;
      break;
  }
  return j;
}

}  // namespace

MultiAlarmCostModel cost_model_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("cost model: invalid JSON: ") + e.what());
  }
  if (!j.contains("c_out")) throw ConfigError("cost model: missing 'c_out'");

  MultiAlarmCostModel model;
  model.c_out = cost_fn_from_json(j.at("c_out"), "a", "b", "c_out");

  if (j.contains("alarms") && j.contains("alarm"))
    throw ConfigError("cost model: give either 'alarms' or 'alarm'+'factors', not both");

  if (j.contains("alarms")) {
    if (!j.at("alarms").is_array() || j.at("alarms").empty())
      throw ConfigError("cost model: 'alarms' must be a non-empty array");
    int n = 0;
    for (const json& a : j.at("alarms")) {
      ++n;
      const std::string id = a.value("id", "a" + std::to_string(n));
      model.alarms.emplace_back(id, alarm_from_json(a, "alarms[" + id + "]"));
    }
  } else if (j.contains("alarm")) {
    // Shorthand: one template alarm, cloned per factors row with its c_in
    // and c_com bases scaled.
    AlarmModel tmpl = alarm_from_json(j.at("alarm"), "alarm");
    if (!j.contains("factors") || !j.at("factors").is_array() || j.at("factors").empty())
      throw ConfigError("cost model: 'alarm' shorthand needs a non-empty 'factors' array");
    int n = 0;
    for (const json& f : j.at("factors")) {
      ++n;
      const std::string id = f.value("id", "a" + std::to_string(n));
      AlarmModel alarm = tmpl;
      const double f_in = f.value("c_in", 1.0);
      const double f_com = f.value("c_com", 1.0);
      if (f_in < 0.0 || f_com < 0.0) throw ConfigError("cost model: factors must be >= 0");
      alarm.c_in.base *= f_in;
      alarm.c_com.base *= f_com;
      model.alarms.emplace_back(id, alarm);
    }
  } else {
    throw ConfigError("cost model: missing 'alarms' (or 'alarm'+'factors')");
  }

  model.validate();
  return model;
}

MultiAlarmCostModel cost_model_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cost model: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return cost_model_from_json_text(ss.str());
}

std::string cost_model_to_json(const MultiAlarmCostModel& model) {
  json j;
  j["c_out"] = cost_fn_to_json(model.c_out);
  j["alarms"] = json::array();
  for (const auto& [id, alarm] : model.alarms) {
    json a;
    a["id"] = id;
    a["c_in"] = cost_fn_to_json(alarm.c_in);
    a["c_com"] = cost_fn_to_json(alarm.c_com);
    a["eff"] = eff_to_json(alarm.eff);
    j["alarms"].push_back(a);
  }
  return j.dump(2);
}

}  // namespace ppm
