#include "ppm/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include "json.hpp"
#include "ppm/csv.hpp"
#include "ppm/errors.hpp"
#include "ppm/rng.hpp"

namespace ppm {

namespace {

using nlohmann::json;

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void require_single_alarm(const MultiAlarmCostModel& model) {
  model.validate();
  if (model.alarms.size() != 1) {
    throw ConfigError("baselines need a single-alarm model, got " +
                      std::to_string(model.alarms.size()) + " alarms");
  }
}

void validate_synthetic_spec(const SyntheticLogSpec& spec) {
  if (spec.n_cases < 1) throw ConfigError("synthetic log needs n_cases >= 1");
  if (!(spec.class_ratio > 0.0 && spec.class_ratio < 1.0)) {
    throw ConfigError("class_ratio must be inside (0, 1)");
  }
  if (spec.min_len < 1 || spec.max_len < spec.min_len) {
    throw ConfigError("need 1 <= min_len <= max_len");
  }
  if (!(spec.signal_strength >= 0.0 && spec.signal_strength <= 1.0)) {
    throw ConfigError("signal_strength must be in [0, 1]");
  }
  if (!(spec.noise >= 0.0)) throw ConfigError("noise must be >= 0");
}

}  // namespace

EvaluationReport evaluate(const std::vector<ProbabilitySeries>& series,
                          const MultiAlarmCostModel& model, const Policy& policy) {
  model.validate();
  validate_policy(policy);
  if (series.empty()) throw DataError("no cases to evaluate");

  EvaluationReport report;
  double total = 0.0;
  double never_total = 0.0;
  for (const auto& s : series) {
    AlarmDecision decision = decide(s, policy);
    total += case_cost(s.trace_len, s.outcome, decision, model);
    never_total += case_cost(s.trace_len, s.outcome, no_alarm(), model);
    if (decision.fired()) {
      ++report.alarms_per_type[*decision.alarm_id];
      (s.outcome ? report.tp : report.fp) += 1;
    } else {
      (s.outcome ? report.fn : report.tn) += 1;
    }
  }
  const double n = static_cast<double>(series.size());
  report.avg_cost_per_case = total / n;
  report.benefit = never_total / n - report.avg_cost_per_case;
  const double prec = report.tp + report.fp > 0
                          ? static_cast<double>(report.tp) / static_cast<double>(report.tp + report.fp)
                          : 0.0;
  const double rec = report.tp + report.fn > 0
                         ? static_cast<double>(report.tp) / static_cast<double>(report.tp + report.fn)
                         : 0.0;
  report.f_score = prec + rec > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
  report.policy = policy_to_json(policy);
  return report;
}

std::map<std::string, EvaluationReport> baselines(const std::vector<ProbabilitySeries>& series,
                                                  const MultiAlarmCostModel& model) {
  require_single_alarm(model);
  const std::string& id = model.alarms.front().first;
  std::map<std::string, EvaluationReport> reports;
  reports["never"] = evaluate(series, model, NeverPolicy{});
  reports["always_at_start"] = evaluate(series, model, AlwaysPolicy{id});
  reports["tau_0.5"] = evaluate(series, model, BasicPolicy{0.5, id});
  return reports;
}

SyntheticData generate_synthetic_log(const SyntheticLogSpec& spec) {
  validate_synthetic_spec(spec);
  Rng rng(spec.seed);

  // Outcome-conditional parameters. The numeric attribute is
  // N(+/-delta, sigma^2); the activity is "warn" with probability q1 for
  // undesired cases and q0 otherwise. Both collapse to identical
  // distributions at signal strength 0.
  const double delta = 1.5 * spec.signal_strength;
  const double sigma = 1.0 + spec.noise;
  const double q1 = 0.5 + 0.3 * spec.signal_strength;
  const double q0 = 0.5 - 0.3 * spec.signal_strength;
  const double prior_logit = std::log(spec.class_ratio) - std::log(1.0 - spec.class_ratio);
  const double warn_llr = std::log(q1) - std::log(q0);
  const double ok_llr = std::log(1.0 - q1) - std::log(1.0 - q0);

  int width = 1;
  for (int v = spec.n_cases - 1; v >= 10; v /= 10) ++width;
  width = std::max(width, 4);

  const Timestamp epoch = 1672531200000;  // 2023-01-01T00:00:00Z
  const Timestamp case_gap = 3600 * 1000;
  const Timestamp event_gap = 60 * 1000;

  SyntheticData data;
  for (int c = 0; c < spec.n_cases; ++c) {
    const bool undesired = rng.next_double() < spec.class_ratio;
    const int len = spec.min_len + static_cast<int>(rng.next_below(
                                       static_cast<std::uint64_t>(spec.max_len - spec.min_len + 1)));
    std::string id = std::to_string(c);
    id.insert(0, static_cast<std::size_t>(width) - std::min<std::size_t>(id.size(), width), '0');
    id.insert(0, "c");

    Trace trace;
    trace.case_id = id;
    ProbabilitySeries oracle;
    oracle.case_id = id;
    oracle.outcome = undesired;
    oracle.trace_len = len;

    double logit = prior_logit;
    for (int k = 0; k < len; ++k) {
      const bool warn = rng.next_double() < (undesired ? q1 : q0);
      const double x = (undesired ? delta : -delta) + sigma * rng.next_gaussian();
      logit += (warn ? warn_llr : ok_llr) + 2.0 * delta * x / (sigma * sigma);

      Event event;
      event.activity = warn ? "warn" : "ok";
      event.timestamp = epoch + static_cast<Timestamp>(c) * case_gap +
                        static_cast<Timestamp>(k) * event_gap;
      event.attrs["x"] = x;
      trace.events.push_back(std::move(event));
      oracle.probs.push_back(sigmoid(logit));
    }
    data.log.add_trace(std::move(trace));
    data.log.set_label(id, undesired);
    data.oracle.push_back(std::move(oracle));
  }
  return data;
}

SyntheticLogSpec synthetic_spec_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad synthetic spec JSON: ") + e.what());
  }
  try {
    SyntheticLogSpec spec;
    spec.n_cases = j.value("n_cases", spec.n_cases);
    spec.class_ratio = j.value("class_ratio", spec.class_ratio);
    spec.min_len = j.value("min_len", spec.min_len);
    spec.max_len = j.value("max_len", spec.max_len);
    spec.signal_strength = j.value("signal_strength", spec.signal_strength);
    spec.noise = j.value("noise", spec.noise);
    spec.seed = j.value("seed", spec.seed);
    validate_synthetic_spec(spec);
    return spec;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad synthetic spec JSON: ") + e.what());
  }
}

namespace {

// Emits one evaluated row per policy plus the three reference baselines for
// a sweep cell.
struct CellWriter {
  const RqConfig& config;
  std::vector<RqRow>& rows;
  std::vector<std::pair<std::string, std::string>> params;

  void add(const std::string& name, const MultiAlarmCostModel& model, const Policy& policy) {
    rows.push_back({config.rq, params, name, evaluate(config.test, model, policy)});
  }

  void add_baselines(const MultiAlarmCostModel& model) {
    add("never", model, NeverPolicy{});
    add("always_at_start", model, AlwaysPolicy{model.alarms.front().first});
    add("tau_0.5", model, BasicPolicy{0.5, model.alarms.front().first});
  }
};

const std::vector<double> kRqOutRatios{1, 2, 3, 5, 10, 20};

CostFnSpec rq_cost(const RqConfig& config, double base, bool is_com) {
  if (config.cost_type == "constant") return constant_cost(base);
  if (config.cost_type == "linear") {
    // Only the intervention cost grows along the case in this variant.
    return is_com ? constant_cost(base) : linear_cost(base);
  }
  if (config.cost_type == "non_monotonic") {
    return is_com ? non_monotonic_cost(base, config.nm_c, config.nm_d)
                  : non_monotonic_cost(base, config.nm_a, config.nm_b);
  }
  throw ConfigError("unknown cost_type '" + config.cost_type + "'");
}

EffSpec rq_eff(const RqConfig& config) {
  if (config.cost_type == "constant") return constant_eff(1.0);
  if (config.cost_type == "linear") return linear_decay_eff();
  if (config.cost_type == "non_monotonic") return non_monotonic_eff(config.nm_e, config.nm_f);
  throw ConfigError("unknown cost_type '" + config.cost_type + "'");
}

const char* rq_eff_name(const RqConfig& config) {
  if (config.cost_type == "constant") return "1";
  if (config.cost_type == "linear") return "linear_decay";
  return "non_monotonic";
}

}  // namespace

std::vector<RqRow> run_rq_suite(const RqConfig& config) {
  std::vector<RqRow> rows;

  if (config.rq == "RQ1" || config.rq == "RQ2" || config.rq == "RQ3") {
    std::vector<double> effs{-1.0};  // -1 = linear decay
    std::vector<double> coms{0.0};
    if (config.rq == "RQ2") {
      effs.clear();
      for (int i = 0; i <= 10; ++i) effs.push_back(i / 10.0);
    }
    if (config.rq == "RQ3") coms = {0, 1.0 / 20, 1.0 / 10, 1.0 / 5, 1.0 / 2, 1, 2, 5, 10, 20};
    for (double c_out : kRqOutRatios) {
      for (double eff : effs) {
        for (double com : coms) {
          MultiAlarmCostModel model = single_alarm_model(
              {constant_cost(1.0), constant_cost(com),
               eff < 0.0 ? linear_decay_eff() : constant_eff(eff)},
              constant_cost(c_out));
          CellWriter cell{config, rows, {}};
          cell.params = {{"c_out", format_number(c_out)},
                         {"c_in", "1"},
                         {"c_com", format_number(com)},
                         {"eff", eff < 0.0 ? "linear_decay" : format_number(eff)}};
          cell.add("optimized", model, optimize_basic(config.thres, model, config.space).best);
          cell.add_baselines(model);
        }
      }
    }
    return rows;
  }

  if (config.rq == "RQ4" || config.rq == "RQ5" || config.rq == "RQ6" || config.rq == "RQ7") {
    std::vector<double> coms{0, 1, 2, 3, 4, 5, 10, 20};
    if (config.cost_type == "constant") coms = {0, 1, 2, 3, 4, 5, 10, 15, 20};
    for (int c_in = 1; c_in <= 5; ++c_in) {
      for (double com : coms) {
        MultiAlarmCostModel model =
            single_alarm_model({rq_cost(config, c_in, false), rq_cost(config, com, true), rq_eff(config)},
                               constant_cost(10.0));
        CellWriter cell{config, rows, {}};
        cell.params = {{"c_out", "10"},
                       {"c_in", format_number(c_in)},
                       {"c_com", format_number(com)},
                       {"eff", rq_eff_name(config)},
                       {"cost_type", config.cost_type}};
        if (config.rq == "RQ4") {
          cell.add("optimized", model, optimize_delayed(config.thres, model, config.space).best);
        } else if (config.rq == "RQ5" || config.rq == "RQ7") {
          SearchSpace space = config.space;
          if (config.rq == "RQ5") space.kappa_grid = {1};
          cell.add("optimized", model, optimize_intervals(config.thres, model, space, 2).best);
        } else {
          // Three user-fixed interval systems, searched over thresholds only.
          const std::vector<std::vector<int>> systems{{1}, {1, 2}, {1, 2, 3}};
          for (const auto& splits : systems) {
            SearchSpace space = config.space;
            space.kappa_grid = {1};
            space.fixed_splits = splits;
            std::string name = "fixed_splits";
            for (int s : splits) name += "_" + std::to_string(s);
            cell.add(name, model, optimize_intervals(config.thres, model, space, 0).best);
          }
        }
        cell.add_baselines(model);
      }
    }
    return rows;
  }

  if (config.rq == "RQ8") {
    const std::vector<double> coms{1, 2, 3, 4, 5, 10, 20, 30, 40};
    for (int c_in = 1; c_in <= 5; ++c_in) {
      for (double com : coms) {
        AlarmModel a1{constant_cost(c_in), constant_cost(com), constant_eff(1.0)};
        AlarmModel a2{constant_cost(c_in * 1.2), constant_cost(com * 0.5), constant_eff(1.0)};
        MultiAlarmCostModel both{{{"a1", a1}, {"a2", a2}}, constant_cost(10.0)};
        MultiAlarmCostModel only1 = single_alarm_model(a1, constant_cost(10.0), "a1");
        MultiAlarmCostModel only2 = single_alarm_model(a2, constant_cost(10.0), "a2");
        CellWriter cell{config, rows, {}};
        cell.params = {{"c_out", "10"},
                       {"c_in", format_number(c_in)},
                       {"c_com", format_number(com)},
                       {"eff", "1"}};
        cell.add("hierarchical", both, optimize_hierarchical(config.thres, both, config.space).best);
        cell.add("single_a1", only1, optimize_basic(config.thres, only1, config.space).best);
        cell.add("single_a2", only2, optimize_basic(config.thres, only2, config.space).best);
        cell.add_baselines(only1);
      }
    }
    return rows;
  }

  throw ConfigError("unknown research question '" + config.rq + "' (expected RQ1..RQ8)");
}

void write_rq_rows(const std::vector<RqRow>& rows, std::ostream& out) {
  const std::vector<std::string> header{"rq",     "c_out",    "c_in",    "c_com", "eff",
                                        "cost_type", "policy", "avg_cost", "benefit", "f_score",
                                        "tp",     "fp",       "fn",      "tn",    "fired"};
  write_csv_row(out, header);
  for (const auto& row : rows) {
    auto param = [&](const char* key) -> std::string {
      for (const auto& [k, v] : row.params) {
        if (k == key) return v;
      }
      return "";
    };
    long fired = 0;
    for (const auto& [id, count] : row.report.alarms_per_type) fired += count;
    std::vector<std::string> fields{row.rq,
                                    param("c_out"),
                                    param("c_in"),
                                    param("c_com"),
                                    param("eff"),
                                    param("cost_type"),
                                    row.policy_name,
                                    format_number(row.report.avg_cost_per_case),
                                    format_number(row.report.benefit),
                                    format_number(row.report.f_score),
                                    std::to_string(row.report.tp),
                                    std::to_string(row.report.fp),
                                    std::to_string(row.report.fn),
                                    std::to_string(row.report.tn),
                                    std::to_string(fired)};
    write_csv_row(out, fields);
  }
}

}  // namespace ppm
