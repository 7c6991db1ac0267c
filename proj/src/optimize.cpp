#include "ppm/optimize.hpp"

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <functional>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "ppm/errors.hpp"
#include "ppm/rng.hpp"

namespace ppm {

namespace {

using nlohmann::json;

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::uint64_t seed) {
  if (n < static_cast<std::size_t>(kCvFolds)) {
    throw DataError("cross-validation needs at least " + std::to_string(kCvFolds) + " cases, got " +
                    std::to_string(n));
  }
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx);
  std::vector<std::vector<std::size_t>> folds(kCvFolds);
  std::size_t base = n / kCvFolds;
  std::size_t rem = n % kCvFolds;
  std::size_t pos = 0;
  for (int f = 0; f < kCvFolds; ++f) {
    std::size_t size = base + (static_cast<std::size_t>(f) < rem ? 1 : 0);
    folds[f].assign(idx.begin() + pos, idx.begin() + pos + size);
    pos += size;
  }
  return folds;
}

// Shared fold evaluation so optimizer internals and cv_objective agree to
// the last bit for the same seed.
std::pair<double, std::vector<double>> fold_eval(const std::vector<ProbabilitySeries>& series,
                                                 const MultiAlarmCostModel& model,
                                                 const Policy& policy,
                                                 const std::vector<std::vector<std::size_t>>& folds) {
  std::vector<double> costs;
  costs.reserve(folds.size());
  double mean = 0.0;
  for (const auto& fold : folds) {
    double total = 0.0;
    for (std::size_t i : fold) {
      const ProbabilitySeries& s = series[i];
      total += case_cost(s.trace_len, s.outcome, decide(s, policy), model);
    }
    costs.push_back(total / static_cast<double>(fold.size()));
    mean += costs.back();
  }
  mean /= static_cast<double>(folds.size());
  return {mean, std::move(costs)};
}

void require_single_alarm(const MultiAlarmCostModel& model) {
  model.validate();
  if (model.alarms.size() != 1) {
    throw ConfigError("this optimizer needs exactly one alarm, got " +
                      std::to_string(model.alarms.size()));
  }
}

void validate_space(const SearchSpace& space) {
  if (space.tau_grid.empty()) throw ConfigError("search space has an empty threshold grid");
  for (double t : space.tau_grid) {
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("threshold grid value out of [0, 1]");
  }
  if (!std::is_sorted(space.tau_grid.begin(), space.tau_grid.end())) {
    throw ConfigError("threshold grid must be ascending");
  }
  if (space.kappa_grid.empty()) throw ConfigError("search space has an empty kappa grid");
  for (int k : space.kappa_grid) {
    if (k < 1) throw ConfigError("kappa grid value must be >= 1");
  }
  if (space.kind == SearchSpace::Kind::Random && space.n_samples < 1) {
    throw ConfigError("random search needs n_samples >= 1");
  }
}

// Tracks the incumbent candidate. The always-at-start candidate loses every
// tie; among equal-cost parameter candidates the caller-supplied ordering
// key decides (lexicographically smaller key wins).
struct Incumbent {
  bool set = false;
  bool is_always = false;
  Policy policy;
  double cost = 0.0;
  std::vector<double> folds;
  std::vector<double> key;

  void offer(Policy p, bool always, std::vector<double> k, double c, std::vector<double> fc) {
    bool better = false;
    if (!set) {
      better = true;
    } else if (c < cost) {
      better = true;
    } else if (c == cost) {
      if (is_always && !always) {
        better = true;
      } else if (!is_always && !always && k < key) {
        better = true;
      }
    }
    if (better) {
      set = true;
      is_always = always;
      policy = std::move(p);
      cost = c;
      folds = std::move(fc);
      key = std::move(k);
    }
  }
};

struct GridEval {
  const std::vector<ProbabilitySeries>& series;
  const MultiAlarmCostModel& model;
  std::vector<std::vector<std::size_t>> folds;
  Incumbent best;
  std::size_t n_candidates = 0;

  GridEval(const std::vector<ProbabilitySeries>& s, const MultiAlarmCostModel& m, std::uint64_t seed)
      : series(s), model(m), folds(make_folds(s.size(), seed)) {}

  void offer(Policy p, bool always, std::vector<double> key) {
    auto [mean, fc] = fold_eval(series, model, p, folds);
    ++n_candidates;
    best.offer(std::move(p), always, std::move(key), mean, std::move(fc));
  }

  OptimizationResult result() const {
    return {best.policy, best.cost, best.folds, n_candidates, false};
  }
};

// Equal costs should favour the larger threshold (alarm later or never),
// so thresholds enter ordering keys negated.
double tau_key(double tau) { return -tau; }

template <typename T>
T pick(Rng& rng, const std::vector<T>& values) {
  return values[static_cast<std::size_t>(rng.next_below(values.size()))];
}

// Ascending (n-1)-combinations of extra interval starts; the first interval
// always starts at 1.
void for_each_split_combo(const std::vector<int>& candidates, int n_extra,
                          const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> combo;
  std::function<void(std::size_t)> rec = [&](std::size_t from) {
    if (static_cast<int>(combo.size()) == n_extra) {
      fn(combo);
      return;
    }
    for (std::size_t i = from; i < candidates.size(); ++i) {
      combo.push_back(candidates[i]);
      rec(i + 1);
      combo.pop_back();
    }
  };
  rec(0);
}

std::vector<int> make_splits(const std::vector<int>& extra) {
  std::vector<int> splits{1};
  splits.insert(splits.end(), extra.begin(), extra.end());
  return splits;
}

int distinct_count(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return static_cast<int>(std::unique(values.begin(), values.end()) - values.begin());
}

std::vector<double> intervals_key(const std::vector<double>& taus, int kappa,
                                  const std::vector<int>& splits) {
  std::vector<double> key;
  key.reserve(taus.size() + 2 + splits.size());
  for (double t : taus) key.push_back(tau_key(t));
  key.push_back(static_cast<double>(distinct_count(taus)));
  key.push_back(static_cast<double>(kappa));
  for (int s : splits) key.push_back(static_cast<double>(s));
  return key;
}

std::vector<double> parse_tau_grid(const json& j) {
  std::vector<double> grid;
  if (j.is_array()) {
    for (const auto& v : j) grid.push_back(v.get<double>());
  } else if (j.is_object()) {
    double start = j.value("start", 0.0);
    double stop = j.value("stop", 1.0);
    double step = j.at("step").get<double>();
    if (step <= 0.0) throw ConfigError("threshold grid step must be positive");
    for (int i = 0;; ++i) {
      double v = start + i * step;
      if (v > stop + step * 1e-9) break;
      grid.push_back(std::min(v, stop));
    }
  } else {
    throw ConfigError("threshold grid must be an array or {start, stop, step}");
  }
  return grid;
}

std::vector<int> parse_int_grid(const json& j, const char* what) {
  std::vector<int> grid;
  if (j.is_array()) {
    for (const auto& v : j) grid.push_back(v.get<int>());
  } else if (j.is_object()) {
    int lo = j.at("min").get<int>();
    int hi = j.at("max").get<int>();
    for (int v = lo; v <= hi; ++v) grid.push_back(v);
  } else {
    throw ConfigError(std::string(what) + " grid must be an array or {min, max}");
  }
  return grid;
}

}  // namespace

SearchSpace SearchSpace::defaults() {
  SearchSpace space;
  for (int i = 0; i <= 100; ++i) space.tau_grid.push_back(i / 100.0);
  for (int k = 1; k <= 7; ++k) space.kappa_grid.push_back(k);
  for (int s = 2; s <= 10; ++s) space.split_candidates.push_back(s);
  return space;
}

double cv_objective(const std::vector<ProbabilitySeries>& series, const MultiAlarmCostModel& model,
                    const Policy& policy, std::uint64_t seed, std::vector<double>* fold_costs) {
  model.validate();
  validate_policy(policy);
  auto folds = make_folds(series.size(), seed);
  auto [mean, costs] = fold_eval(series, model, policy, folds);
  if (fold_costs != nullptr) *fold_costs = std::move(costs);
  return mean;
}

OptimizationResult optimize_basic(const std::vector<ProbabilitySeries>& series,
                                  const MultiAlarmCostModel& model, const SearchSpace& space) {
  require_single_alarm(model);
  validate_space(space);
  const std::string& id = model.alarms.front().first;
  GridEval ev(series, model, space.seed);
  if (space.include_always) ev.offer(AlwaysPolicy{id}, true, {});
  if (space.kind == SearchSpace::Kind::Grid) {
    for (double tau : space.tau_grid) ev.offer(BasicPolicy{tau, id}, false, {tau_key(tau)});
  } else {
    Rng rng(space.seed);
    for (int i = 0; i < space.n_samples; ++i) {
      double tau = pick(rng, space.tau_grid);
      ev.offer(BasicPolicy{tau, id}, false, {tau_key(tau)});
    }
  }
  return ev.result();
}

OptimizationResult optimize_delayed(const std::vector<ProbabilitySeries>& series,
                                    const MultiAlarmCostModel& model, const SearchSpace& space) {
  require_single_alarm(model);
  validate_space(space);
  const std::string& id = model.alarms.front().first;
  GridEval ev(series, model, space.seed);
  if (space.include_always) ev.offer(AlwaysPolicy{id}, true, {});
  auto offer = [&](double tau, int kappa) {
    ev.offer(DelayedPolicy{tau, kappa, id}, false, {tau_key(tau), static_cast<double>(kappa)});
  };
  if (space.kind == SearchSpace::Kind::Grid) {
    for (double tau : space.tau_grid) {
      for (int kappa : space.kappa_grid) offer(tau, kappa);
    }
  } else {
    Rng rng(space.seed);
    for (int i = 0; i < space.n_samples; ++i) offer(pick(rng, space.tau_grid), pick(rng, space.kappa_grid));
  }
  return ev.result();
}

OptimizationResult optimize_intervals(const std::vector<ProbabilitySeries>& series,
                                      const MultiAlarmCostModel& model, const SearchSpace& space,
                                      int n_intervals) {
  require_single_alarm(model);
  validate_space(space);
  const std::string& id = model.alarms.front().first;

  std::vector<std::vector<int>> split_choices;
  if (space.fixed_splits.has_value()) {
    const auto& fixed = *space.fixed_splits;
    if (fixed.empty() || fixed.front() != 1 || !std::is_sorted(fixed.begin(), fixed.end()) ||
        std::adjacent_find(fixed.begin(), fixed.end()) != fixed.end()) {
      throw ConfigError("fixed splits must start at 1 and be strictly increasing");
    }
    split_choices.push_back(fixed);
    n_intervals = static_cast<int>(fixed.size());
  } else {
    if (n_intervals < 1) throw ConfigError("n_intervals must be >= 1");
    int extra = n_intervals - 1;
    if (extra > 0 && static_cast<int>(space.split_candidates.size()) < extra) {
      throw ConfigError("not enough split candidates for " + std::to_string(n_intervals) +
                        " intervals");
    }
    for (int s : space.split_candidates) {
      if (s < 2) throw ConfigError("split candidates must be >= 2");
    }
    for_each_split_combo(space.split_candidates, extra,
                         [&](const std::vector<int>& combo) { split_choices.push_back(make_splits(combo)); });
  }

  GridEval ev(series, model, space.seed);
  if (space.include_always) ev.offer(AlwaysPolicy{id}, true, {});
  auto offer = [&](const std::vector<int>& splits, const std::vector<double>& taus, int kappa) {
    ev.offer(IntervalsPolicy{splits, taus, kappa, id}, false, intervals_key(taus, kappa, splits));
  };

  if (space.kind == SearchSpace::Kind::Grid) {
    std::vector<double> taus(static_cast<std::size_t>(n_intervals));
    std::function<void(const std::vector<int>&, std::size_t)> assign =
        [&](const std::vector<int>& splits, std::size_t slot) {
          if (slot == taus.size()) {
            for (int kappa : space.kappa_grid) offer(splits, taus, kappa);
            return;
          }
          for (double tau : space.tau_grid) {
            taus[slot] = tau;
            assign(splits, slot + 1);
          }
        };
    for (const auto& splits : split_choices) assign(splits, 0);
  } else {
    Rng rng(space.seed);
    for (int i = 0; i < space.n_samples; ++i) {
      const auto& splits = split_choices[static_cast<std::size_t>(rng.next_below(split_choices.size()))];
      std::vector<double> taus;
      taus.reserve(static_cast<std::size_t>(n_intervals));
      for (int t = 0; t < n_intervals; ++t) taus.push_back(pick(rng, space.tau_grid));
      offer(splits, taus, pick(rng, space.kappa_grid));
    }
  }
  return ev.result();
}

OptimizationResult optimize_hierarchical(const std::vector<ProbabilitySeries>& series,
                                         const MultiAlarmCostModel& model, const SearchSpace& space) {
  model.validate();
  validate_space(space);
  if (model.alarms.size() != 2) {
    throw ConfigError("hierarchical optimization needs exactly two alarms, got " +
                      std::to_string(model.alarms.size()));
  }

  // Stage 1: a basic threshold per alarm, each against the full c_out, with
  // no always-at-start shortcut (the combined policy covers that role).
  HierarchicalPolicy policy;
  policy.order = {model.alarms[0].first, model.alarms[1].first};
  std::size_t n_candidates = 0;
  for (const auto& [id, alarm] : model.alarms) {
    SearchSpace stage = space;
    stage.include_always = false;
    OptimizationResult r = optimize_basic(series, single_alarm_model(alarm, model.c_out, id), stage);
    policy.tau_no_vs[id] = std::get<BasicPolicy>(r.best).tau;
    n_candidates += r.n_candidates;
  }

  // Stage 2: the pairwise threshold, tuned by plain total cost over the
  // cases whose first firing prefix exceeds both stage-1 thresholds. For
  // such a case only the low/high choice is still open.
  double tau_low = policy.tau_no_vs.at(policy.order.first);
  double tau_high = policy.tau_no_vs.at(policy.order.second);
  struct Pending {
    const ProbabilitySeries* s;
    int k;
    double p;
  };
  std::vector<Pending> pending;
  for (const auto& s : series) {
    for (int k = 1; k <= s.n_prefixes(); ++k) {
      double p = s.probs[static_cast<std::size_t>(k - 1)];
      bool over_low = p > tau_low;
      bool over_high = p > tau_high;
      if (over_low || over_high) {
        if (over_low && over_high) pending.push_back({&s, k, p});
        break;
      }
    }
  }

  bool defaulted = pending.empty();
  if (defaulted) {
    policy.tau_pairwise = 1.0;
  } else {
    bool have = false;
    double best_cost = 0.0;
    for (double tau : space.tau_grid) {
      double total = 0.0;
      for (const Pending& q : pending) {
        const std::string& id = q.p <= tau ? policy.order.first : policy.order.second;
        total += case_cost(q.s->trace_len, q.s->outcome, fire(id, q.k), model);
      }
      ++n_candidates;
      if (!have || total < best_cost || (total == best_cost && tau > policy.tau_pairwise)) {
        have = true;
        best_cost = total;
        policy.tau_pairwise = tau;
      }
    }
  }

  OptimizationResult result;
  result.best = policy;
  result.cv_mean_cost = cv_objective(series, model, result.best, space.seed, &result.fold_costs);
  result.n_candidates = n_candidates;
  result.pairwise_defaulted = defaulted;
  return result;
}

SearchSpace search_space_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad search space JSON: ") + e.what());
  }
  try {
    SearchSpace space = SearchSpace::defaults();
    if (j.contains("kind")) {
      std::string kind = j.at("kind").get<std::string>();
      if (kind == "grid") {
        space.kind = SearchSpace::Kind::Grid;
      } else if (kind == "random") {
        space.kind = SearchSpace::Kind::Random;
      } else {
        throw ConfigError("unknown search kind '" + kind + "'");
      }
    }
    if (j.contains("tau")) space.tau_grid = parse_tau_grid(j.at("tau"));
    if (j.contains("kappa")) space.kappa_grid = parse_int_grid(j.at("kappa"), "kappa");
    if (j.contains("split_candidates")) {
      space.split_candidates = parse_int_grid(j.at("split_candidates"), "split candidate");
    }
    if (j.contains("fixed_splits")) {
      space.fixed_splits = parse_int_grid(j.at("fixed_splits"), "fixed split");
    }
    if (j.contains("n_samples")) space.n_samples = j.at("n_samples").get<int>();
    if (j.contains("seed")) space.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("include_always")) space.include_always = j.at("include_always").get<bool>();
    validate_space(space);
    return space;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad search space JSON: ") + e.what());
  }
}

SearchSpace search_space_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open search space file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return search_space_from_json_text(buf.str());
}

std::string search_space_to_json(const SearchSpace& space) {
  json j;
  j["kind"] = space.kind == SearchSpace::Kind::Grid ? "grid" : "random";
  j["tau"] = space.tau_grid;
  j["kappa"] = space.kappa_grid;
  j["split_candidates"] = space.split_candidates;
  if (space.fixed_splits.has_value()) j["fixed_splits"] = *space.fixed_splits;
  if (space.kind == SearchSpace::Kind::Random) j["n_samples"] = space.n_samples;
  j["seed"] = space.seed;
  j["include_always"] = space.include_always;
  return j.dump(2);
}

std::string result_to_json(const OptimizationResult& result) {
  json j;
  j["policy"] = json::parse(policy_to_json(result.best));
  j["cv_mean_cost"] = result.cv_mean_cost;
  j["fold_costs"] = result.fold_costs;
  j["n_candidates"] = result.n_candidates;
  j["pairwise_defaulted"] = result.pairwise_defaulted;
  return j.dump(2);
}

}  // namespace ppm
