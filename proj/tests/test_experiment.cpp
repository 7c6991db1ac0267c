#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ppm/csv.hpp"
#include "ppm/errors.hpp"
#include "ppm/experiment.hpp"
#include "ppm/rng.hpp"

using namespace ppm;

namespace {

ProbabilitySeries series(std::string id, std::vector<double> probs, bool outcome) {
  ProbabilitySeries s;
  s.case_id = std::move(id);
  s.probs = std::move(probs);
  s.outcome = outcome;
  s.trace_len = s.n_prefixes();
  return s;
}

MultiAlarmCostModel simple_model(double c_in, double c_com, double c_out, double eff = 1.0) {
  return single_alarm_model({constant_cost(c_in), constant_cost(c_com), constant_eff(eff)},
                            constant_cost(c_out));
}

SearchSpace coarse_space(std::uint64_t seed) {
  SearchSpace space;
  for (int i = 0; i <= 20; ++i) space.tau_grid.push_back(i / 20.0);
  space.kappa_grid = {1, 2};
  space.split_candidates = {2, 3};
  space.seed = seed;
  return space;
}

std::vector<RqRow> rows_named(const std::vector<RqRow>& rows, const std::string& name) {
  std::vector<RqRow> out;
  for (const auto& r : rows) {
    if (r.policy_name == name) out.push_back(r);
  }
  return out;
}

std::string param(const RqRow& row, const std::string& key) {
  for (const auto& [k, v] : row.params) {
    if (k == key) return v;
  }
  return "";
}

}  // namespace

TEST_CASE("never policy has zero benefit and pure outcome cost") {
  std::vector<ProbabilitySeries> set{series("u1", {0.9, 0.9}, true), series("u2", {0.8}, true),
                                     series("d1", {0.1}, false), series("d2", {0.2}, false)};
  auto report = evaluate(set, simple_model(1, 0, 10), NeverPolicy{});
  CHECK(report.benefit == 0.0);
  CHECK(report.avg_cost_per_case == 5.0);  // c_out over the two undesired cases
  CHECK(report.f_score == 0.0);
  CHECK(report.tp == 0);
  CHECK(report.fp == 0);
  CHECK(report.fn == 2);
  CHECK(report.tn == 2);
  CHECK(report.alarms_per_type.empty());
}

TEST_CASE("confusion arithmetic by hand") {
  std::vector<ProbabilitySeries> set{series("u", {0.9}, true), series("d", {0.9}, false)};
  auto report = evaluate(set, simple_model(1, 0, 10), BasicPolicy{0.5, "a1"});
  CHECK(report.tp == 1);
  CHECK(report.fp == 1);
  CHECK(report.fn == 0);
  CHECK(report.tn == 0);
  CHECK(report.f_score == 2.0 / 3.0);  // precision 1/2, recall 1
  CHECK(report.alarms_per_type.at("a1") == 2);
}

TEST_CASE("perfect estimates at tau 0.5 halve nothing and save everything") {
  std::vector<ProbabilitySeries> set{series("u", {1.0, 1.0}, true), series("d", {0.0, 0.0}, false)};
  auto report = evaluate(set, simple_model(1, 0, 10), BasicPolicy{0.5, "a1"});
  CHECK(report.avg_cost_per_case == 0.5);
  CHECK(report.benefit == 4.5);
  CHECK(report.f_score == 1.0);
}

TEST_CASE("counts always partition the case set") {
  Rng rng(99);
  std::vector<ProbabilitySeries> set;
  for (int c = 0; c < 100; ++c) {
    std::vector<double> probs;
    const int len = 1 + static_cast<int>(rng.next_below(6));
    for (int k = 0; k < len; ++k) probs.push_back(rng.next_double());
    set.push_back(series("c" + std::to_string(c), std::move(probs), rng.next_below(2) == 0));
  }
  auto model = simple_model(2, 1, 10, 0.7);
  std::vector<Policy> policies{NeverPolicy{}, AlwaysPolicy{"a1"}, BasicPolicy{0.3, "a1"},
                               DelayedPolicy{0.4, 2, "a1"}};
  double never_avg = evaluate(set, model, NeverPolicy{}).avg_cost_per_case;
  for (const auto& p : policies) {
    auto report = evaluate(set, model, p);
    CHECK(report.tp + report.fp + report.fn + report.tn == 100);
    CHECK(report.avg_cost_per_case >= 0.0);
    CHECK(report.benefit <= never_avg);
    CHECK(report.f_score >= 0.0);
    CHECK(report.f_score <= 1.0);
  }
}

TEST_CASE("evaluate rejects an empty case set") {
  std::vector<ProbabilitySeries> none;
  CHECK_THROWS_AS(evaluate(none, simple_model(1, 0, 10), NeverPolicy{}), DataError);
}

TEST_CASE("baselines cover never, always-at-start, and tau 0.5") {
  std::vector<ProbabilitySeries> set{series("u1", {1.0}, true), series("u2", {1.0, 1.0}, true),
                                     series("u3", {1.0}, true), series("d1", {0.0}, false),
                                     series("d2", {0.0}, false)};
  auto reports = baselines(set, simple_model(1, 0, 10));
  REQUIRE(reports.count("never") == 1);
  REQUIRE(reports.count("always_at_start") == 1);
  REQUIRE(reports.count("tau_0.5") == 1);

  CHECK(reports["never"].avg_cost_per_case == 6.0);
  CHECK(reports["never"].benefit == 0.0);
  CHECK(reports["never"].f_score == 0.0);

  CHECK(reports["always_at_start"].alarms_per_type.at("a1") == 5);
  CHECK(reports["always_at_start"].tp == 3);
  CHECK(reports["always_at_start"].fp == 2);
  CHECK(reports["always_at_start"].avg_cost_per_case == 1.0);

  CHECK(reports["tau_0.5"].tp == 3);
  CHECK(reports["tau_0.5"].tn == 2);
  CHECK(reports["tau_0.5"].f_score == 1.0);
  CHECK(reports["tau_0.5"].benefit == 6.0 - 0.6);

  MultiAlarmCostModel two{{{"a1", {constant_cost(1), constant_cost(0), constant_eff(1)}},
                           {"a2", {constant_cost(2), constant_cost(0), constant_eff(1)}}},
                          constant_cost(10)};
  CHECK_THROWS_AS(baselines(set, two), ConfigError);
}

TEST_CASE("synthetic generation is deterministic") {
  SyntheticLogSpec spec;
  spec.n_cases = 100;
  spec.seed = 42;
  auto a = generate_synthetic_log(spec);
  auto b = generate_synthetic_log(spec);
  CHECK(a.log == b.log);
  CHECK(a.oracle == b.oracle);
  CHECK(a.log.size() == 100);
  CHECK(a.log.fully_labeled());

  spec.seed = 43;
  auto c = generate_synthetic_log(spec);
  CHECK_FALSE(a.log == c.log);
}

TEST_CASE("synthetic traces respect the requested shape") {
  SyntheticLogSpec spec;
  spec.n_cases = 60;
  spec.min_len = 3;
  spec.max_len = 9;
  spec.seed = 8;
  auto data = generate_synthetic_log(spec);
  REQUIRE(data.oracle.size() == 60);
  Timestamp prev_start = -1;
  for (std::size_t i = 0; i < data.log.traces().size(); ++i) {
    const Trace& t = data.log.traces()[i];
    CHECK(t.length() >= 3);
    CHECK(t.length() <= 9);
    CHECK(t.start_time() > prev_start);
    prev_start = t.start_time();
    CHECK(data.oracle[i].case_id == t.case_id);
    CHECK(data.oracle[i].trace_len == t.length());
    CHECK(data.oracle[i].n_prefixes() == t.length());
    CHECK(*data.log.label(t.case_id) == data.oracle[i].outcome);
    for (const Event& e : t.events) {
      CHECK((e.activity == "ok" || e.activity == "warn"));
      CHECK(std::holds_alternative<double>(e.attrs.at("x")));
    }
  }
}

TEST_CASE("zero signal means the prior is all there is") {
  SyntheticLogSpec spec;
  spec.n_cases = 40;
  spec.class_ratio = 0.3;
  spec.signal_strength = 0.0;
  spec.seed = 7;
  auto data = generate_synthetic_log(spec);
  for (const auto& s : data.oracle) {
    for (double p : s.probs) {
      CHECK(p == s.probs.front());  // no information, no movement
      CHECK(p == doctest::Approx(0.3).epsilon(1e-12));
    }
  }
}

TEST_CASE("oracle probabilities are calibrated and decisive at full signal") {
  SyntheticLogSpec spec;
  spec.n_cases = 10000;
  spec.seed = 31;
  auto data = generate_synthetic_log(spec);

  // Calibration: within a probability bucket, the undesired share must match
  // the predicted probability.
  struct Bucket {
    long count = 0;
    long undesired = 0;
    double sum_p = 0.0;
  };
  std::vector<Bucket> buckets(10);
  long decisive = 0;
  for (const auto& s : data.oracle) {
    for (double p : s.probs) {
      auto& b = buckets[std::min<std::size_t>(9, static_cast<std::size_t>(p * 10.0))];
      ++b.count;
      b.undesired += s.outcome ? 1 : 0;
      b.sum_p += p;
    }
    double mid = s.probs[static_cast<std::size_t>((s.n_prefixes() - 1) / 2)];
    if (mid <= 0.05 || mid >= 0.95) ++decisive;
  }
  for (const auto& b : buckets) {
    if (b.count < 2000) continue;
    double rate = static_cast<double>(b.undesired) / static_cast<double>(b.count);
    double mean_p = b.sum_p / static_cast<double>(b.count);
    CHECK(std::abs(rate - mean_p) <= 0.02);
  }
  CHECK(static_cast<double>(decisive) / 10000.0 >= 0.9);

  // Same check at a moderate signal level, where mid-range buckets fill up.
  spec.signal_strength = 0.35;
  spec.seed = 32;
  auto soft = generate_synthetic_log(spec);
  std::vector<Bucket> soft_buckets(10);
  for (const auto& s : soft.oracle) {
    for (double p : s.probs) {
      auto& b = soft_buckets[std::min<std::size_t>(9, static_cast<std::size_t>(p * 10.0))];
      ++b.count;
      b.undesired += s.outcome ? 1 : 0;
      b.sum_p += p;
    }
  }
  for (const auto& b : soft_buckets) {
    if (b.count < 2000) continue;
    double rate = static_cast<double>(b.undesired) / static_cast<double>(b.count);
    double mean_p = b.sum_p / static_cast<double>(b.count);
    CHECK(std::abs(rate - mean_p) <= 0.02);
  }
}

TEST_CASE("synthetic log round-trips through the canonical CSV") {
  SyntheticLogSpec spec;
  spec.n_cases = 50;
  spec.seed = 12;
  auto data = generate_synthetic_log(spec);
  std::ostringstream out;
  write_event_log(data.log, out);
  std::istringstream in(out.str());
  LogSchema schema = canonical_schema(true);
  EventLog parsed = parse_event_log(in, schema);
  EventLog labeled = label_outcomes(parsed, *schema.label);
  CHECK(labeled == data.log);
}

TEST_CASE("synthetic spec json parses and validates") {
  auto spec = synthetic_spec_from_json_text(R"({
    "n_cases": 12, "class_ratio": 0.25, "min_len": 2, "max_len": 5,
    "signal_strength": 0.5, "noise": 1.5, "seed": 9
  })");
  CHECK(spec.n_cases == 12);
  CHECK(spec.class_ratio == 0.25);
  CHECK(spec.min_len == 2);
  CHECK(spec.max_len == 5);
  CHECK(spec.signal_strength == 0.5);
  CHECK(spec.noise == 1.5);
  CHECK(spec.seed == 9);

  CHECK_THROWS_AS(synthetic_spec_from_json_text("{\"class_ratio\": 0.0}"), ConfigError);
  CHECK_THROWS_AS(synthetic_spec_from_json_text("{\"min_len\": 6, \"max_len\": 2}"), ConfigError);
  CHECK_THROWS_AS(synthetic_spec_from_json_text("nope"), ConfigError);
  CHECK_THROWS_AS(generate_synthetic_log({-1, 0.5, 1, 2, 1.0, 0.0, 0}), ConfigError);
}

namespace {

RqConfig make_rq_config(const std::string& rq, std::uint64_t seed = 3) {
  SyntheticLogSpec spec;
  spec.n_cases = 120;
  spec.signal_strength = 0.9;
  spec.seed = 11;
  static SyntheticData data = generate_synthetic_log(spec);
  RqConfig config;
  config.rq = rq;
  config.thres.assign(data.oracle.begin(), data.oracle.begin() + 60);
  config.test.assign(data.oracle.begin() + 60, data.oracle.end());
  config.space = coarse_space(seed);
  return config;
}

}  // namespace

TEST_CASE("RQ1 sweeps the six outcome-to-intervention ratios") {
  auto rows = run_rq_suite(make_rq_config("RQ1"));
  CHECK(rows.size() == 6 * 4);
  auto optimized = rows_named(rows, "optimized");
  REQUIRE(optimized.size() == 6);
  std::vector<std::string> ratios;
  for (const auto& r : optimized) ratios.push_back(param(r, "c_out"));
  CHECK(ratios == std::vector<std::string>{"1", "2", "3", "5", "10", "20"});
  for (const auto& r : optimized) {
    CHECK(param(r, "c_in") == "1");
    CHECK(param(r, "eff") == "linear_decay");
  }
  CHECK(rows_named(rows, "never").size() == 6);
  CHECK(rows_named(rows, "always_at_start").size() == 6);
  CHECK(rows_named(rows, "tau_0.5").size() == 6);
}

TEST_CASE("RQ2 swaps the decay for eleven constant effectiveness levels") {
  auto rows = run_rq_suite(make_rq_config("RQ2"));
  auto optimized = rows_named(rows, "optimized");
  REQUIRE(optimized.size() == 6 * 11);
  std::vector<std::string> effs;
  for (std::size_t i = 0; i < 11; ++i) effs.push_back(param(optimized[i], "eff"));
  CHECK(effs == std::vector<std::string>{"0", "0.1", "0.2", "0.3", "0.4", "0.5", "0.6", "0.7",
                                         "0.8", "0.9", "1"});
}

TEST_CASE("RQ3 sweeps compensation costs") {
  auto rows = run_rq_suite(make_rq_config("RQ3"));
  auto optimized = rows_named(rows, "optimized");
  REQUIRE(optimized.size() == 6 * 10);
  CHECK(param(optimized[1], "c_com") == "0.05");
  CHECK(param(optimized[9], "c_com") == "20");
}

TEST_CASE("RQ4 runs the delayed-firing search per cost variant") {
  auto config = make_rq_config("RQ4");
  config.cost_type = "linear";
  auto rows = run_rq_suite(config);
  auto optimized = rows_named(rows, "optimized");
  CHECK(optimized.size() == 5 * 8);
  for (const auto& r : optimized) {
    CHECK(param(r, "cost_type") == "linear");
    CHECK(param(r, "c_out") == "10");
  }

  config.cost_type = "constant";
  CHECK(rows_named(run_rq_suite(config), "optimized").size() == 5 * 9);

  config.cost_type = "sigmoid";
  CHECK_THROWS_AS(run_rq_suite(config), ConfigError);
}

TEST_CASE("RQ6 evaluates the three user-fixed interval systems") {
  auto config = make_rq_config("RQ6");
  config.cost_type = "non_monotonic";
  config.space.tau_grid = {0.0, 0.25, 0.5, 0.75, 1.0};
  auto rows = run_rq_suite(config);
  CHECK(rows_named(rows, "fixed_splits_1").size() == 5 * 8);
  CHECK(rows_named(rows, "fixed_splits_1_2").size() == 5 * 8);
  CHECK(rows_named(rows, "fixed_splits_1_2_3").size() == 5 * 8);
  CHECK(rows.size() == 5 * 8 * 6);
}

TEST_CASE("RQ8 applies the alarm-2 cost factors") {
  auto config = make_rq_config("RQ8");
  auto rows = run_rq_suite(config);
  CHECK(rows.size() == 5 * 9 * 6);
  CHECK(rows_named(rows, "hierarchical").size() == 45);
  CHECK(rows_named(rows, "single_a1").size() == 45);
  CHECK(rows_named(rows, "single_a2").size() == 45);

  // Reproduce one single_a2 row by hand: alarm 2 is alarm 1 with the
  // intervention cost scaled by 1.2 and compensation halved.
  const RqRow* target = nullptr;
  for (const auto& r : rows) {
    if (r.policy_name == "single_a2" && param(r, "c_in") == "2" && param(r, "c_com") == "10") {
      target = &r;
    }
  }
  REQUIRE(target != nullptr);
  MultiAlarmCostModel a2 = single_alarm_model(
      {constant_cost(2 * 1.2), constant_cost(10 * 0.5), constant_eff(1.0)}, constant_cost(10.0), "a2");
  auto best = optimize_basic(config.thres, a2, config.space).best;
  CHECK(evaluate(config.test, a2, best).avg_cost_per_case == target->report.avg_cost_per_case);
}

TEST_CASE("optimized policies dominate baselines on the thresholding set") {
  auto config = make_rq_config("RQ1");
  MultiAlarmCostModel model =
      single_alarm_model({constant_cost(1.0), constant_cost(0.0), linear_decay_eff()},
                         constant_cost(10.0));
  auto result = optimize_basic(config.thres, model, config.space);
  for (const Policy& p : {Policy{NeverPolicy{}}, Policy{AlwaysPolicy{"a1"}}, Policy{BasicPolicy{0.5, "a1"}},
                          Policy{BasicPolicy{1.0, "a1"}}}) {
    CHECK(result.cv_mean_cost <= cv_objective(config.thres, model, p, config.space.seed));
  }
}

TEST_CASE("rq rows serialize to a stable csv") {
  auto config = make_rq_config("RQ1");
  auto rows = run_rq_suite(config);
  std::ostringstream out;
  write_rq_rows(rows, out);
  std::istringstream in(out.str());
  CsvTable table = read_csv(in);
  CHECK(table.header == std::vector<std::string>{"rq", "c_out", "c_in", "c_com", "eff", "cost_type",
                                                 "policy", "avg_cost", "benefit", "f_score", "tp",
                                                 "fp", "fn", "tn", "fired"});
  CHECK(table.rows.size() == rows.size());
  CHECK(table.rows[0].fields[0] == "RQ1");

  std::ostringstream again;
  write_rq_rows(run_rq_suite(config), again);
  CHECK(out.str() == again.str());
}

TEST_CASE("unknown research questions are rejected") {
  auto config = make_rq_config("RQ9");
  CHECK_THROWS_AS(run_rq_suite(config), ConfigError);
}
