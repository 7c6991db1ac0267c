#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ppm/cost.hpp"
#include "ppm/series.hpp"

namespace ppm {

// Fire at the first prefix whose probability strictly exceeds tau.
struct BasicPolicy {
  double tau = 0.5;
  std::string alarm_id = "a1";

  bool operator==(const BasicPolicy&) const = default;
};

// Fire once the probability has exceeded tau for kappa consecutive prefixes.
struct DelayedPolicy {
  double tau = 0.5;
  int kappa = 1;
  std::string alarm_id = "a1";

  bool operator==(const DelayedPolicy&) const = default;
};

// Per-prefix-length thresholds: position k is governed by taus[i] where i is
// the last interval starting at or before k. Delay kappa applies on top,
// each position checked against its own interval's threshold.
struct IntervalsPolicy {
  std::vector<int> splits;  // interval starts; splits[0] == 1, strictly increasing
  std::vector<double> taus;
  int kappa = 1;
  std::string alarm_id = "a1";

  bool operator==(const IntervalsPolicy&) const = default;
};

// Two-alarm escalation. Per-alarm no-alarm-versus-alarm thresholds plus a
// pairwise threshold that picks between the alarms when both are in play.
struct HierarchicalPolicy {
  std::pair<std::string, std::string> order;  // (low id, high id)
  std::map<std::string, double> tau_no_vs;    // alarm id -> threshold
  double tau_pairwise = 1.0;

  bool operator==(const HierarchicalPolicy&) const = default;
};

// Baselines. Always fires at the first prefix unconditionally (distinct from
// Basic(0), which needs a strictly positive probability); Never never fires.
struct AlwaysPolicy {
  std::string alarm_id = "a1";

  bool operator==(const AlwaysPolicy&) const = default;
};

struct NeverPolicy {
  bool operator==(const NeverPolicy&) const = default;
};

using Policy =
    std::variant<BasicPolicy, DelayedPolicy, IntervalsPolicy, HierarchicalPolicy, AlwaysPolicy, NeverPolicy>;

void validate_policy(const Policy& policy);  // throws ConfigError

AlarmDecision decide_basic(const ProbabilitySeries& s, double tau, const std::string& alarm_id = "a1");
AlarmDecision decide_delayed(const ProbabilitySeries& s, double tau, int kappa,
                             const std::string& alarm_id = "a1");
AlarmDecision decide_intervals(const ProbabilitySeries& s, const std::vector<int>& splits,
                               const std::vector<double>& taus, int kappa,
                               const std::string& alarm_id = "a1");
AlarmDecision decide_hierarchical(const ProbabilitySeries& s, const HierarchicalPolicy& policy);

AlarmDecision decide(const ProbabilitySeries& s, const Policy& policy);

std::map<std::string, AlarmDecision> apply_policy(const std::vector<ProbabilitySeries>& series,
                                                  const Policy& policy);

Policy policy_from_json_text(const std::string& text);
Policy policy_from_json_file(const std::string& path);
std::string policy_to_json(const Policy& policy);

// CSV `case_id,alarm_id,fired_at`; unfired cases keep both fields empty.
void write_decisions(const std::map<std::string, AlarmDecision>& decisions, std::ostream& out);
std::map<std::string, AlarmDecision> read_decisions(std::istream& in);

}  // namespace ppm
