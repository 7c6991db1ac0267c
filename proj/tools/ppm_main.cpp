#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ppm/encoding.hpp"
#include "ppm/errors.hpp"
#include "ppm/estimator.hpp"
#include "ppm/event_log.hpp"
#include "ppm/experiment.hpp"
#include "ppm/optimize.hpp"
#include "ppm/policy.hpp"

namespace {

using namespace ppm;
using nlohmann::json;

json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::exception& e) {
    throw ConfigError("bad JSON in '" + path + "': " + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file '" + path + "'");
  out << text;
}

// Shared --config/--out-dir/--seed handling. Flags win; otherwise keys from
// the JSON config file fill in; otherwise defaults stay.
struct Common {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  CLI::Option* out_dir_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  json cfg = json::object();

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file; explicit flags override it");
    out_dir_opt = app->add_option("--out-dir", out_dir, "directory for output files");
    seed_opt = app->add_option("--seed", seed, "seed for all randomized steps");
  }

  template <typename T>
  void fall(const CLI::Option* opt, const char* key, T& var) const {
    if (opt->count() == 0 && cfg.contains(key)) {
      try {
        var = cfg.at(key).get<T>();
      } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
      }
    }
  }

  void resolve() {
    if (!config_path.empty()) cfg = load_json_file(config_path);
    if (!cfg.is_object()) throw ConfigError("config file must hold a JSON object");
    fall(out_dir_opt, "out_dir", out_dir);
    fall(seed_opt, "seed", seed);
    std::filesystem::create_directories(out_dir);
  }

  std::string path(const std::string& name) const {
    return (std::filesystem::path(out_dir) / name).string();
  }
};

void emit(const json& manifest, const std::string& file) {
  std::string text = manifest.dump(2) + "\n";
  write_text_file(file, text);
  std::cout << text;
}

// ---- split ----------------------------------------------------------------

struct SplitArgs {
  Common common;
  std::string log, schema;
  double truncate = 0.0;
  CLI::Option *log_opt, *schema_opt, *trunc_opt;
};

void run_split(SplitArgs& a) {
  a.common.resolve();
  a.common.fall(a.log_opt, "log", a.log);
  a.common.fall(a.schema_opt, "schema", a.schema);
  a.common.fall(a.trunc_opt, "truncate", a.truncate);
  if (a.log.empty()) throw ConfigError("split needs --log");
  if (a.schema.empty()) throw ConfigError("split needs --schema");

  LogSchema schema = schema_from_json_file(a.schema);
  EventLog log = read_event_log_file(a.log, schema);
  int truncated_to = 0;
  if (a.truncate > 0.0) {
    log = truncate_log(log, a.truncate);
    for (const Trace& t : log.traces()) truncated_to = std::max(truncated_to, t.length());
  }
  DatasetSplit split = temporal_split(log, a.common.seed);
  write_event_log_file(split.train, a.common.path("train.csv"));
  write_event_log_file(split.thres, a.common.path("thres.csv"));
  write_event_log_file(split.test, a.common.path("test.csv"));

  json manifest;
  manifest["command"] = "split";
  manifest["seed"] = a.common.seed;
  manifest["counts"] = {{"train", split.train.size()}, {"thres", split.thres.size()},
                        {"test", split.test.size()}};
  manifest["config"] = {{"log", a.log}, {"schema", a.schema}, {"truncate", a.truncate},
                        {"out_dir", a.common.out_dir}};
  if (a.truncate > 0.0) manifest["truncated_to"] = truncated_to;
  emit(manifest, a.common.path("split_manifest.json"));
}

// ---- score ----------------------------------------------------------------

struct ScoreArgs {
  Common common;
  std::string train, thres, test;
  bool oracle = false;
  std::string external_thres, external_test;
  EstimatorParams params;
  int max_len = 0;
  CLI::Option *train_opt, *thres_opt, *test_opt, *oracle_opt, *ext_thres_opt, *ext_test_opt;
  CLI::Option *rounds_opt, *depth_opt, *lr_opt, *min_leaf_opt, *max_len_opt;
};

void run_score(ScoreArgs& a) {
  a.common.resolve();
  a.common.fall(a.train_opt, "train", a.train);
  a.common.fall(a.thres_opt, "thres", a.thres);
  a.common.fall(a.test_opt, "test", a.test);
  a.common.fall(a.oracle_opt, "oracle", a.oracle);
  a.common.fall(a.ext_thres_opt, "external_thres", a.external_thres);
  a.common.fall(a.ext_test_opt, "external_test", a.external_test);
  a.common.fall(a.rounds_opt, "rounds", a.params.n_rounds);
  a.common.fall(a.depth_opt, "depth", a.params.max_depth);
  a.common.fall(a.lr_opt, "learning_rate", a.params.learning_rate);
  a.common.fall(a.min_leaf_opt, "min_leaf", a.params.min_leaf);
  a.common.fall(a.max_len_opt, "max_len", a.max_len);
  a.params.seed = a.common.seed;

  json manifest;
  manifest["command"] = "score";
  manifest["seed"] = a.common.seed;

  if (!a.external_thres.empty() || !a.external_test.empty()) {
    // Pre-computed estimates from an outside classifier: validate and
    // normalize them into the canonical score files, no training at all.
    if (a.external_thres.empty() || a.external_test.empty()) {
      throw ConfigError("external scoring needs both --external-thres and --external-test");
    }
    write_scores_file(load_external_scores_file(a.external_thres), a.common.path("thres_scores.csv"));
    write_scores_file(load_external_scores_file(a.external_test), a.common.path("test_scores.csv"));
    manifest["mode"] = "external";
    manifest["config"] = {{"external_thres", a.external_thres}, {"external_test", a.external_test},
                          {"out_dir", a.common.out_dir}};
    emit(manifest, a.common.path("score_manifest.json"));
    return;
  }

  if (a.train.empty() || a.thres.empty() || a.test.empty()) {
    throw ConfigError("score needs --train, --thres and --test");
  }
  LogSchema schema = canonical_schema(true);
  EventLog train = read_event_log_file(a.train, schema);
  EventLog thres = read_event_log_file(a.thres, schema);
  EventLog test = read_event_log_file(a.test, schema);

  int max_len = a.max_len;
  if (max_len <= 0) {
    for (const Trace& t : train.traces()) max_len = std::max(max_len, t.length());
  }
  EncoderState encoder = EncoderState::fit(train);

  Estimator estimator;
  if (a.oracle) {
    estimator = OracleScore{};
    manifest["mode"] = "oracle";
  } else {
    std::vector<FeatureVector> features;
    std::vector<bool> labels;
    for (const Trace& t : train.traces()) {
      auto lbl = train.label(t.case_id);
      if (!lbl.has_value()) throw DataError("train case '" + t.case_id + "' has no outcome label");
      for (const Prefix& p : prefixes(t, max_len)) {
        features.push_back(encoder.encode(p));
        labels.push_back(*lbl);
      }
    }
    FitDiagnostics diag;
    GbtModel model = GbtModel::fit(features, labels, a.params, &diag);
    write_text_file(a.common.path("model.json"), model.to_json());
    write_text_file(a.common.path("encoder.json"), encoder.to_json());
    manifest["mode"] = "gbt";
    manifest["n_training_prefixes"] = features.size();
    manifest["final_train_loss"] = diag.train_loss.empty() ? 0.0 : diag.train_loss.back();
    estimator = std::move(model);
  }

  write_scores_file(score_log(estimator, thres, encoder, max_len), a.common.path("thres_scores.csv"));
  write_scores_file(score_log(estimator, test, encoder, max_len), a.common.path("test_scores.csv"));

  manifest["max_len"] = max_len;
  manifest["params"] = {{"rounds", a.params.n_rounds}, {"depth", a.params.max_depth},
                        {"learning_rate", a.params.learning_rate}, {"min_leaf", a.params.min_leaf}};
  manifest["config"] = {{"train", a.train}, {"thres", a.thres}, {"test", a.test},
                        {"out_dir", a.common.out_dir}};
  emit(manifest, a.common.path("score_manifest.json"));
}

// ---- optimize ---------------------------------------------------------------

struct OptimizeArgs {
  Common common;
  std::string scores, model, family = "basic", space, out;
  int n_intervals = 2;
  CLI::Option *scores_opt, *model_opt, *family_opt, *space_opt, *out_opt, *n_intervals_opt;
};

SearchSpace load_space(const std::string& path, const Common& common) {
  SearchSpace space = path.empty() ? SearchSpace::defaults() : search_space_from_json_file(path);
  if (common.seed_opt->count() > 0 || common.cfg.contains("seed")) space.seed = common.seed;
  return space;
}

void run_optimize(OptimizeArgs& a) {
  a.common.resolve();
  a.common.fall(a.scores_opt, "scores", a.scores);
  a.common.fall(a.model_opt, "model", a.model);
  a.common.fall(a.family_opt, "family", a.family);
  a.common.fall(a.space_opt, "space", a.space);
  a.common.fall(a.out_opt, "out", a.out);
  a.common.fall(a.n_intervals_opt, "n_intervals", a.n_intervals);
  if (a.scores.empty()) throw ConfigError("optimize needs --scores");
  if (a.model.empty()) throw ConfigError("optimize needs --model");
  if (a.out.empty()) a.out = a.common.path("optimize_result.json");

  std::vector<ProbabilitySeries> series = load_external_scores_file(a.scores);
  MultiAlarmCostModel model = cost_model_from_json_file(a.model);
  SearchSpace space = load_space(a.space, a.common);

  OptimizationResult result;
  if (a.family == "basic") {
    result = optimize_basic(series, model, space);
  } else if (a.family == "delayed") {
    result = optimize_delayed(series, model, space);
  } else if (a.family == "intervals") {
    result = optimize_intervals(series, model, space, a.n_intervals);
  } else if (a.family == "hierarchical") {
    result = optimize_hierarchical(series, model, space);
  } else {
    throw ConfigError("unknown policy family '" + a.family +
                      "' (expected basic, delayed, intervals or hierarchical)");
  }

  json out;
  out["command"] = "optimize";
  out["family"] = a.family;
  if (a.family == "intervals") out["n_intervals"] = a.n_intervals;
  out["scores"] = a.scores;
  out["cost_model"] = json::parse(cost_model_to_json(model));
  out["space"] = json::parse(search_space_to_json(space));
  out["result"] = json::parse(result_to_json(result));
  emit(out, a.out);
}

// ---- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
  Common common;
  std::string scores, model, policy, decisions, out;
  CLI::Option *scores_opt, *model_opt, *policy_opt, *decisions_opt, *out_opt;
};

json report_to_json(const EvaluationReport& report) {
  json j;
  j["avg_cost_per_case"] = report.avg_cost_per_case;
  j["benefit"] = report.benefit;
  j["f_score"] = report.f_score;
  j["tp"] = report.tp;
  j["fp"] = report.fp;
  j["fn"] = report.fn;
  j["tn"] = report.tn;
  j["alarms_per_type"] = report.alarms_per_type;
  j["policy"] = json::parse(report.policy);
  return j;
}

void run_evaluate(EvaluateArgs& a) {
  a.common.resolve();
  a.common.fall(a.scores_opt, "scores", a.scores);
  a.common.fall(a.model_opt, "model", a.model);
  a.common.fall(a.policy_opt, "policy", a.policy);
  a.common.fall(a.decisions_opt, "decisions", a.decisions);
  a.common.fall(a.out_opt, "out", a.out);
  if (a.scores.empty()) throw ConfigError("evaluate needs --scores");
  if (a.model.empty()) throw ConfigError("evaluate needs --model");
  if (a.policy.empty()) throw ConfigError("evaluate needs --policy");
  if (a.out.empty()) a.out = a.common.path("evaluation.json");

  std::vector<ProbabilitySeries> series = load_external_scores_file(a.scores);
  MultiAlarmCostModel model = cost_model_from_json_file(a.model);
  Policy policy = policy_from_json_file(a.policy);
  EvaluationReport report = evaluate(series, model, policy);

  if (!a.decisions.empty()) {
    std::ofstream out(a.decisions, std::ios::binary);
    if (!out) throw ConfigError("cannot write file '" + a.decisions + "'");
    write_decisions(apply_policy(series, policy), out);
  }

  json out;
  out["command"] = "evaluate";
  out["scores"] = a.scores;
  out["cost_model"] = json::parse(cost_model_to_json(model));
  out["report"] = report_to_json(report);
  emit(out, a.out);
}

// ---- rq ---------------------------------------------------------------------

struct RqArgs {
  Common common;
  RqConfig rq;
  std::string thres_scores, test_scores, space, out;
  CLI::Option *rq_opt, *thres_opt, *test_opt, *cost_type_opt, *space_opt, *out_opt;
  CLI::Option *nm_opts[6];
};

void run_rq(RqArgs& a) {
  a.common.resolve();
  a.common.fall(a.rq_opt, "rq", a.rq.rq);
  a.common.fall(a.thres_opt, "thres_scores", a.thres_scores);
  a.common.fall(a.test_opt, "test_scores", a.test_scores);
  a.common.fall(a.cost_type_opt, "cost_type", a.rq.cost_type);
  a.common.fall(a.space_opt, "space", a.space);
  a.common.fall(a.out_opt, "out", a.out);
  int* nm[6] = {&a.rq.nm_a, &a.rq.nm_b, &a.rq.nm_c, &a.rq.nm_d, &a.rq.nm_e, &a.rq.nm_f};
  const char* nm_keys[6] = {"nm_a", "nm_b", "nm_c", "nm_d", "nm_e", "nm_f"};
  for (int i = 0; i < 6; ++i) a.common.fall(a.nm_opts[i], nm_keys[i], *nm[i]);
  if (a.rq.rq.empty()) throw ConfigError("rq needs --rq (RQ1..RQ8)");
  if (a.thres_scores.empty()) throw ConfigError("rq needs --thres-scores");
  if (a.test_scores.empty()) throw ConfigError("rq needs --test-scores");
  if (a.out.empty()) a.out = a.common.path("rq_results.csv");

  a.rq.thres = load_external_scores_file(a.thres_scores);
  a.rq.test = load_external_scores_file(a.test_scores);
  a.rq.space = load_space(a.space, a.common);

  std::vector<RqRow> rows = run_rq_suite(a.rq);
  std::ostringstream csv;
  write_rq_rows(rows, csv);
  write_text_file(a.out, csv.str());

  json manifest;
  manifest["command"] = "rq";
  manifest["rq"] = a.rq.rq;
  manifest["cost_type"] = a.rq.cost_type;
  manifest["n_rows"] = rows.size();
  manifest["results"] = a.out;
  manifest["space"] = json::parse(search_space_to_json(a.rq.space));
  manifest["config"] = {{"thres_scores", a.thres_scores}, {"test_scores", a.test_scores},
                        {"out_dir", a.common.out_dir}};
  emit(manifest, a.common.path("rq_manifest.json"));
}

// ---- synth ------------------------------------------------------------------

struct SynthArgs {
  Common common;
  std::string spec_path;
  SyntheticLogSpec spec;
  CLI::Option *spec_opt, *cases_opt, *ratio_opt, *min_len_opt, *max_len_opt, *signal_opt, *noise_opt;
};

void run_synth(SynthArgs& a) {
  a.common.resolve();
  a.common.fall(a.spec_opt, "spec", a.spec_path);
  if (!a.spec_path.empty()) {
    SyntheticLogSpec from_file = synthetic_spec_from_json_text(read_text_file(a.spec_path));
    // Flags still override individual fields of the spec file.
    if (a.cases_opt->count() == 0) a.spec.n_cases = from_file.n_cases;
    if (a.ratio_opt->count() == 0) a.spec.class_ratio = from_file.class_ratio;
    if (a.min_len_opt->count() == 0) a.spec.min_len = from_file.min_len;
    if (a.max_len_opt->count() == 0) a.spec.max_len = from_file.max_len;
    if (a.signal_opt->count() == 0) a.spec.signal_strength = from_file.signal_strength;
    if (a.noise_opt->count() == 0) a.spec.noise = from_file.noise;
    if (a.common.seed_opt->count() == 0 && !a.common.cfg.contains("seed")) a.spec.seed = from_file.seed;
    else a.spec.seed = a.common.seed;
  } else {
    a.common.fall(a.cases_opt, "cases", a.spec.n_cases);
    a.common.fall(a.ratio_opt, "ratio", a.spec.class_ratio);
    a.common.fall(a.min_len_opt, "min_len", a.spec.min_len);
    a.common.fall(a.max_len_opt, "max_len", a.spec.max_len);
    a.common.fall(a.signal_opt, "signal", a.spec.signal_strength);
    a.common.fall(a.noise_opt, "noise", a.spec.noise);
    a.spec.seed = a.common.seed;
  }

  SyntheticData data = generate_synthetic_log(a.spec);
  write_event_log_file(data.log, a.common.path("synth_log.csv"));
  write_scores_file(data.oracle, a.common.path("oracle_scores.csv"));

  long undesired = 0;
  for (const auto& [id, label] : data.log.labels()) undesired += label ? 1 : 0;
  json manifest;
  manifest["command"] = "synth";
  manifest["spec"] = {{"n_cases", a.spec.n_cases}, {"class_ratio", a.spec.class_ratio},
                      {"min_len", a.spec.min_len}, {"max_len", a.spec.max_len},
                      {"signal_strength", a.spec.signal_strength}, {"noise", a.spec.noise},
                      {"seed", a.spec.seed}};
  manifest["n_undesired"] = undesired;
  emit(manifest, a.common.path("synth_manifest.json"));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"alarm-based prescriptive process monitoring"};
  app.require_subcommand(1);

  SplitArgs split_args;
  CLI::App* split = app.add_subcommand("split", "temporal 64/16/20 split of a labeled event log");
  split_args.log_opt = split->add_option("--log", split_args.log, "event log CSV");
  split_args.schema_opt = split->add_option("--schema", split_args.schema, "log schema JSON");
  split_args.trunc_opt = split->add_option("--truncate", split_args.truncate,
                                           "truncate traces to this length percentile first");
  split_args.common.attach(split);
  split->callback([&] { run_split(split_args); });

  ScoreArgs score_args;
  CLI::App* score = app.add_subcommand("score", "train the estimator and emit per-prefix scores");
  score_args.train_opt = score->add_option("--train", score_args.train, "training split CSV");
  score_args.thres_opt = score->add_option("--thres", score_args.thres, "thresholding split CSV");
  score_args.test_opt = score->add_option("--test", score_args.test, "test split CSV");
  score_args.oracle_opt =
      score->add_flag("--oracle", score_args.oracle, "emit ground-truth outcomes instead of training");
  score_args.ext_thres_opt = score->add_option("--external-thres", score_args.external_thres,
                                               "pre-computed thresholding scores CSV");
  score_args.ext_test_opt =
      score->add_option("--external-test", score_args.external_test, "pre-computed test scores CSV");
  score_args.rounds_opt = score->add_option("--rounds", score_args.params.n_rounds, "boosting rounds");
  score_args.depth_opt = score->add_option("--depth", score_args.params.max_depth, "max tree depth");
  score_args.lr_opt = score->add_option("--learning-rate", score_args.params.learning_rate, "shrinkage");
  score_args.min_leaf_opt =
      score->add_option("--min-leaf", score_args.params.min_leaf, "min samples per leaf");
  score_args.max_len_opt =
      score->add_option("--max-len", score_args.max_len, "prefix length cap (0 = longest train trace)");
  score_args.common.attach(score);
  score->callback([&] { run_score(score_args); });

  OptimizeArgs optimize_args;
  CLI::App* optimize = app.add_subcommand("optimize", "empirical thresholding on a score file");
  optimize_args.scores_opt =
      optimize->add_option("--scores", optimize_args.scores, "thresholding scores CSV");
  optimize_args.model_opt = optimize->add_option("--model", optimize_args.model, "cost model JSON");
  optimize_args.family_opt = optimize->add_option(
      "--family", optimize_args.family, "policy family: basic, delayed, intervals, hierarchical");
  optimize_args.n_intervals_opt =
      optimize->add_option("--n-intervals", optimize_args.n_intervals, "intervals to search");
  optimize_args.space_opt = optimize->add_option("--space", optimize_args.space, "search space JSON");
  optimize_args.out_opt = optimize->add_option("--out", optimize_args.out, "result JSON path");
  optimize_args.common.attach(optimize);
  optimize->callback([&] { run_optimize(optimize_args); });

  EvaluateArgs evaluate_args;
  CLI::App* evaluate = app.add_subcommand("evaluate", "measure a policy on test scores");
  evaluate_args.scores_opt = evaluate->add_option("--scores", evaluate_args.scores, "test scores CSV");
  evaluate_args.model_opt = evaluate->add_option("--model", evaluate_args.model, "cost model JSON");
  evaluate_args.policy_opt = evaluate->add_option("--policy", evaluate_args.policy, "policy JSON");
  evaluate_args.decisions_opt =
      evaluate->add_option("--decisions", evaluate_args.decisions, "also write decisions CSV here");
  evaluate_args.out_opt = evaluate->add_option("--out", evaluate_args.out, "report JSON path");
  evaluate_args.common.attach(evaluate);
  evaluate->callback([&] { run_evaluate(evaluate_args); });

  RqArgs rq_args;
  CLI::App* rq = app.add_subcommand("rq", "run one research-question sweep");
  rq_args.rq_opt = rq->add_option("--rq", rq_args.rq.rq, "RQ1..RQ8");
  rq_args.thres_opt = rq->add_option("--thres-scores", rq_args.thres_scores, "thresholding scores CSV");
  rq_args.test_opt = rq->add_option("--test-scores", rq_args.test_scores, "test scores CSV");
  rq_args.cost_type_opt = rq->add_option("--cost-type", rq_args.rq.cost_type,
                                         "RQ4-RQ7 variant: constant, linear, non_monotonic");
  rq_args.space_opt = rq->add_option("--space", rq_args.space, "search space JSON");
  rq_args.out_opt = rq->add_option("--out", rq_args.out, "results CSV path");
  rq_args.nm_opts[0] = rq->add_option("--nm-a", rq_args.rq.nm_a, "non-monotonic c_in cap");
  rq_args.nm_opts[1] = rq->add_option("--nm-b", rq_args.rq.nm_b, "non-monotonic c_in divisor");
  rq_args.nm_opts[2] = rq->add_option("--nm-c", rq_args.rq.nm_c, "non-monotonic c_com cap");
  rq_args.nm_opts[3] = rq->add_option("--nm-d", rq_args.rq.nm_d, "non-monotonic c_com divisor");
  rq_args.nm_opts[4] = rq->add_option("--nm-e", rq_args.rq.nm_e, "non-monotonic eff cap");
  rq_args.nm_opts[5] = rq->add_option("--nm-f", rq_args.rq.nm_f, "non-monotonic eff divisor");
  rq_args.common.attach(rq);
  rq->callback([&] { run_rq(rq_args); });

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic log with oracle scores");
  synth_args.spec_opt = synth->add_option("--spec", synth_args.spec_path, "generator spec JSON");
  synth_args.cases_opt = synth->add_option("--cases", synth_args.spec.n_cases, "number of cases");
  synth_args.ratio_opt = synth->add_option("--ratio", synth_args.spec.class_ratio,
                                           "share of undesired outcomes");
  synth_args.min_len_opt = synth->add_option("--min-len", synth_args.spec.min_len, "shortest trace");
  synth_args.max_len_opt = synth->add_option("--max-len", synth_args.spec.max_len, "longest trace");
  synth_args.signal_opt =
      synth->add_option("--signal", synth_args.spec.signal_strength, "outcome signal strength [0,1]");
  synth_args.noise_opt = synth->add_option("--noise", synth_args.spec.noise, "observation noise");
  synth_args.common.attach(synth);
  synth->callback([&] { run_synth(synth_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "ppm: error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "ppm: data error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
