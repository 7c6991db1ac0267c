#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ppm/cost.hpp"
#include "ppm/event_log.hpp"
#include "ppm/optimize.hpp"
#include "ppm/policy.hpp"
#include "ppm/series.hpp"

namespace ppm {

// Offline quality of one policy on one scored case set. Benefit is the
// cost reduction against the never-alarm baseline on the same set; counts
// are per case (fired on undesired = tp, fired on desired = fp).
struct EvaluationReport {
  double avg_cost_per_case = 0.0;
  double benefit = 0.0;
  double f_score = 0.0;  // 0 when precision + recall is 0
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long tn = 0;
  std::map<std::string, long> alarms_per_type;  // alarm id -> fired count
  std::string policy;                           // JSON echo of the evaluated policy
};

EvaluationReport evaluate(const std::vector<ProbabilitySeries>& series,
                          const MultiAlarmCostModel& model, const Policy& policy);

// The reference policies: never, always_at_start, tau_0.5. Single-alarm
// models only.
std::map<std::string, EvaluationReport> baselines(const std::vector<ProbabilitySeries>& series,
                                                  const MultiAlarmCostModel& model);

// Seeded generator whose exact per-prefix outcome probability is known in
// closed form. Each event carries an activity (ok/warn) and a numeric
// attribute x; both are drawn from outcome-conditional distributions, so
// the Bayes posterior accumulates one log-likelihood-ratio step per event
// and a trained estimator has a real signal to find.
struct SyntheticLogSpec {
  int n_cases = 100;
  double class_ratio = 0.5;      // share of undesired outcomes, in (0, 1)
  int min_len = 4;
  int max_len = 8;
  double signal_strength = 1.0;  // 0 = no information, 1 = strongest separation
  double noise = 0.0;            // widens the numeric attribute's spread
  std::uint64_t seed = 0;
};

struct SyntheticData {
  EventLog log;
  std::vector<ProbabilitySeries> oracle;  // exact posterior per prefix
};

SyntheticData generate_synthetic_log(const SyntheticLogSpec& spec);
SyntheticLogSpec synthetic_spec_from_json_text(const std::string& text);

// One research-question sweep: a grid of alarm-model configurations, each
// optimized on the thresholding scores and measured on the test scores.
struct RqConfig {
  std::string rq;  // RQ1 .. RQ8
  std::vector<ProbabilitySeries> thres;
  std::vector<ProbabilitySeries> test;
  SearchSpace space = SearchSpace::defaults();
  std::string cost_type = "constant";  // RQ4-RQ7 variant: constant | linear | non_monotonic
  // Non-monotonic shape constants: cap/divisor for c_in (a, b), c_com (c, d)
  // and eff (e, f).
  int nm_a = 10;
  int nm_b = 35;
  int nm_c = 13;
  int nm_d = 32;
  int nm_e = 18;
  int nm_f = 40;
};

struct RqRow {
  std::string rq;
  std::vector<std::pair<std::string, std::string>> params;  // column -> printed value
  std::string policy_name;
  EvaluationReport report;
};

std::vector<RqRow> run_rq_suite(const RqConfig& config);

// CSV: rq,c_out,c_in,c_com,eff,cost_type,policy,avg_cost,benefit,f_score,
// tp,fp,fn,tn,fired
void write_rq_rows(const std::vector<RqRow>& rows, std::ostream& out);

}  // namespace ppm
