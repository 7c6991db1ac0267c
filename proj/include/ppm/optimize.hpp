#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ppm/cost.hpp"
#include "ppm/policy.hpp"
#include "ppm/series.hpp"

namespace ppm {

inline constexpr int kCvFolds = 3;

// Candidate grids for empirical thresholding. The always-at-start baseline
// is included as an explicit candidate (least preferred on ties) so the
// optimum can never lose to that baseline on the thresholding set.
struct SearchSpace {
  enum class Kind { Grid, Random };

  Kind kind = Kind::Grid;
  std::vector<double> tau_grid;       // thresholds, ascending
  std::vector<int> kappa_grid;        // firing delays, ascending
  std::vector<int> split_candidates;  // candidate interval starts (>= 2)
  std::optional<std::vector<int>> fixed_splits;  // user-defined intervals, first must be 1
  int n_samples = 0;                  // Random kind: candidates to draw
  std::uint64_t seed = 0;             // fold shuffle and random sampling
  bool include_always = true;

  // tau 0.00..1.00 step 0.01, kappa 1..7, splits 2..10, grid search.
  static SearchSpace defaults();
};

struct OptimizationResult {
  Policy best;
  double cv_mean_cost = 0.0;
  std::vector<double> fold_costs;   // per-fold avg cost of the best candidate
  std::size_t n_candidates = 0;
  bool pairwise_defaulted = false;  // hierarchical stage 2 had no data
};

// Mean over 3 case-folds (seeded shuffle) of the average per-case cost of
// the policy's decisions.
double cv_objective(const std::vector<ProbabilitySeries>& series, const MultiAlarmCostModel& model,
                    const Policy& policy, std::uint64_t seed,
                    std::vector<double>* fold_costs = nullptr);

// Single-alarm searches; the model must have exactly one alarm. Ties go to
// the larger threshold (fewer, later alarms), then the smaller kappa.
OptimizationResult optimize_basic(const std::vector<ProbabilitySeries>& series,
                                  const MultiAlarmCostModel& model, const SearchSpace& space);
OptimizationResult optimize_delayed(const std::vector<ProbabilitySeries>& series,
                                    const MultiAlarmCostModel& model, const SearchSpace& space);
OptimizationResult optimize_intervals(const std::vector<ProbabilitySeries>& series,
                                      const MultiAlarmCostModel& model, const SearchSpace& space,
                                      int n_intervals);

// Two-alarm, two-stage: per-alarm basic thresholds first, then the pairwise
// threshold on prefixes exceeding both.
OptimizationResult optimize_hierarchical(const std::vector<ProbabilitySeries>& series,
                                         const MultiAlarmCostModel& model, const SearchSpace& space);

SearchSpace search_space_from_json_text(const std::string& text);
SearchSpace search_space_from_json_file(const std::string& path);
std::string search_space_to_json(const SearchSpace& space);
std::string result_to_json(const OptimizationResult& result);

}  // namespace ppm
