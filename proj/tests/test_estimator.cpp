#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ppm/errors.hpp"
#include "ppm/estimator.hpp"
#include "ppm/rng.hpp"

using namespace ppm;

namespace {

// Two overlapping Gaussian classes on feature 0 plus a pure-noise feature.
void gaussian_fixture(Rng& rng, int n, double sep, std::vector<FeatureVector>& x,
                      std::vector<bool>& y) {
  for (int i = 0; i < n; ++i) {
    const bool label = rng.next_below(2) == 0;
    x.push_back({(label ? sep : -sep) + rng.next_gaussian(), rng.next_gaussian()});
    y.push_back(label);
  }
}

EstimatorParams small_params(int rounds) {
  EstimatorParams p;
  p.n_rounds = rounds;
  p.min_leaf = 5;
  return p;
}

}  // namespace

TEST_CASE("separable data is fit to perfect training accuracy") {
  Rng rng(1);
  std::vector<FeatureVector> x;
  std::vector<bool> y;
  for (int i = 0; i < 60; ++i) {
    const bool label = i % 2 == 0;
    x.push_back({(label ? 1.0 : -1.0) + 0.4 * rng.next_double(), rng.next_gaussian()});
    y.push_back(label);
  }
  GbtModel m = GbtModel::fit(x, y, small_params(50));
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK((m.predict_proba(x[i]) > 0.5) == y[i]);
  // Confident on a clearly positive point.
  CHECK(m.predict_proba({1.2, 0.0}) > 0.9);
}

TEST_CASE("flipping every label mirrors the predictions") {
  Rng rng(2);
  std::vector<FeatureVector> x;
  std::vector<bool> y;
  gaussian_fixture(rng, 300, 0.8, x, y);
  std::vector<bool> flipped;
  for (bool b : y) flipped.push_back(!b);

  GbtModel m1 = GbtModel::fit(x, y, small_params(40));
  GbtModel m2 = GbtModel::fit(x, flipped, small_params(40));
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(std::abs(m1.predict_proba(x[i]) + m2.predict_proba(x[i]) - 1.0) <= 1e-6);
}

TEST_CASE("parameter and data validation") {
  std::vector<FeatureVector> x = {{0.0}, {1.0}};
  std::vector<bool> y = {false, true};
  EstimatorParams p;
  p.n_rounds = 0;
  CHECK_THROWS_AS(GbtModel::fit(x, y, p), ConfigError);
  p.n_rounds = 1;
  p.learning_rate = 0.0;
  CHECK_THROWS_AS(GbtModel::fit(x, y, p), ConfigError);
  p.learning_rate = 0.1;
  CHECK_THROWS_AS(GbtModel::fit(x, {true, true}, p), DataError);
  CHECK_THROWS_AS(GbtModel::fit({{0.0}, {1.0, 2.0}}, y, p), ConfigError);

  GbtModel m = GbtModel::fit(x, y, p);
  CHECK_THROWS_AS(m.predict_proba({0.0, 1.0}), ConfigError);
}

TEST_CASE("prior-only model predicts the base rate everywhere") {
  // A model with no trees reduces to sigmoid(prior log-odds).
  const double bias = std::log(0.2 / 0.8);
  std::ostringstream j;
  j.precision(17);
  j << "{\"bias\":" << bias << ",\"learning_rate\":0.1,\"dim\":2,\"trees\":[]}";
  GbtModel m = GbtModel::from_json(j.str());
  CHECK(m.predict_proba({0.0, 0.0}) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(m.predict_proba({5.0, -3.0}) == doctest::Approx(0.2).epsilon(1e-12));
  const double once = m.predict_proba({1.0, 1.0});
  CHECK(m.predict_proba({1.0, 1.0}) == once);
}

TEST_CASE("training loss never increases over rounds") {
  Rng rng(3);
  std::vector<FeatureVector> x;
  std::vector<bool> y;
  gaussian_fixture(rng, 400, 0.5, x, y);
  FitDiagnostics diag;
  GbtModel::fit(x, y, small_params(60), &diag);
  REQUIRE(diag.train_loss.size() == 60);
  for (std::size_t i = 1; i < diag.train_loss.size(); ++i)
    CHECK(diag.train_loss[i] <= diag.train_loss[i - 1] + 1e-12);
}

TEST_CASE("fitting is deterministic") {
  Rng rng(4);
  std::vector<FeatureVector> x;
  std::vector<bool> y;
  gaussian_fixture(rng, 200, 0.6, x, y);
  GbtModel a = GbtModel::fit(x, y, small_params(25));
  GbtModel b = GbtModel::fit(x, y, small_params(25));
  CHECK(a == b);
  CHECK(a.to_json() == b.to_json());
}

TEST_CASE("model json round-trips") {
  Rng rng(5);
  std::vector<FeatureVector> x;
  std::vector<bool> y;
  gaussian_fixture(rng, 150, 0.7, x, y);
  GbtModel m = GbtModel::fit(x, y, small_params(10));
  GbtModel back = GbtModel::from_json(m.to_json());
  CHECK(back == m);
  for (int i = 0; i < 20; ++i) {
    FeatureVector v = {rng.next_gaussian(), rng.next_gaussian()};
    CHECK(back.predict_proba(v) == m.predict_proba(v));
  }
  CHECK_THROWS_AS(GbtModel::from_json("{"), ConfigError);
  CHECK_THROWS_AS(GbtModel::from_json("{}"), ConfigError);
}

namespace {

EventLog scored_fixture() {
  EventLog log;
  for (int c = 0; c < 12; ++c) {
    Trace t{"c" + std::to_string(c < 10 ? c + 10 : c - 10), {}};  // ids unsorted on purpose
    for (int i = 0; i < 3; ++i) t.events.push_back(Event{"go", i * 60000, {}, {}});
    log.add_trace(std::move(t));
  }
  for (const Trace& t : log.traces()) log.set_label(t.case_id, t.case_id < "c16");
  return log;
}

}  // namespace

TEST_CASE("score_log emits one ordered series per case") {
  EventLog log = scored_fixture();
  EncoderState enc = EncoderState::fit(log);

  std::vector<ProbabilitySeries> s = score_log(Estimator{ConstantScore{0.4}}, log, enc, 10);
  REQUIRE(s.size() == log.size());
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i - 1].case_id < s[i].case_id);
  for (const auto& one : s) {
    CHECK(one.n_prefixes() == 3);
    CHECK(one.trace_len == 3);
    for (double p : one.probs) CHECK(p == 0.4);
  }

  std::vector<ProbabilitySeries> capped = score_log(Estimator{ConstantScore{0.4}}, log, enc, 2);
  for (const auto& one : capped) {
    CHECK(one.n_prefixes() == 2);
    CHECK(one.trace_len == 3);
  }

  std::vector<ProbabilitySeries> oracle = score_log(Estimator{OracleScore{}}, log, enc, 10);
  for (const auto& one : oracle)
    for (double p : one.probs) CHECK(p == (one.outcome ? 1.0 : 0.0));

  EventLog unlabeled;
  unlabeled.add_trace(Trace{"u", {Event{"go", 0, {}, {}}}});
  CHECK_THROWS_AS(score_log(Estimator{ConstantScore{0.4}}, unlabeled, enc, 10), DataError);
}

TEST_CASE("score csv round-trips and is byte-stable") {
  EventLog log = scored_fixture();
  EncoderState enc = EncoderState::fit(log);
  GbtModel m;
  {
    // tiny real model so probabilities are non-trivial
    std::vector<FeatureVector> x;
    std::vector<bool> y;
    for (const Trace& t : log.traces())
      for (const Prefix& p : prefixes(t, 10)) {
        x.push_back(enc.encode(p));
        y.push_back(*log.label(t.case_id));
      }
    EstimatorParams params;
    params.n_rounds = 5;
    params.min_leaf = 2;
    m = GbtModel::fit(x, y, params);
  }
  std::vector<ProbabilitySeries> s = score_log(Estimator{m}, log, enc, 10);

  std::ostringstream out1, out2;
  write_scores(s, out1);
  write_scores(s, out2);
  CHECK(out1.str() == out2.str());

  std::istringstream in(out1.str());
  std::vector<ProbabilitySeries> back = load_external_scores(in);
  CHECK(back == s);
}

TEST_CASE("external score validation") {
  auto load = [](const std::string& text) {
    std::istringstream in(text);
    return load_external_scores(in);
  };
  const std::string header = "case_id,prefix_len,probability,outcome,trace_len\n";

  std::vector<ProbabilitySeries> ok = load(header +
                                           "A,1,0.2,1,3\n"
                                           "A,2,0.4,1,3\n"
                                           "A,3,0.6,1,3\n");
  REQUIRE(ok.size() == 1);
  CHECK(ok[0].probs == std::vector<double>{0.2, 0.4, 0.6});
  CHECK(ok[0].outcome);
  CHECK(ok[0].trace_len == 3);

  CHECK_THROWS_WITH_AS(load(header + "A,1,1.2,1,3\n"), doctest::Contains("line 2"), DataError);
  CHECK_THROWS_AS(load(header + "A,1,0.2,1,3\nA,3,0.4,1,3\n"), DataError);  // gap
  CHECK_THROWS_AS(load(header + "A,2,0.2,1,3\n"), DataError);               // starts past 1
  CHECK_THROWS_AS(load(header + "A,1,0.2,1,3\nA,1,0.3,1,3\n"), DataError);  // duplicate
  CHECK_THROWS_AS(load(header + "A,1,0.2,1,3\nA,2,0.4,0,3\n"), DataError);  // outcome flips
  CHECK_THROWS_AS(load(header + "A,1,0.2,maybe,3\n"), DataError);
  CHECK_THROWS_AS(load(header + "A,1,0.2,1,0\n"), DataError);
  CHECK_THROWS_AS(load("case_id,prefix_len\nA,1\n"), DataError);
  CHECK_THROWS_AS(load(header), DataError);  // empty body
  // four prefixes on a length-3 trace
  CHECK_THROWS_AS(load(header + "A,1,0.2,1,3\nA,2,0.2,1,3\nA,3,0.2,1,3\nA,4,0.2,1,3\n"), DataError);
}

TEST_CASE("oracle estimator rejects feature-level prediction") {
  CHECK_THROWS_AS(predict_proba(Estimator{OracleScore{}}, {1.0}), ConfigError);
  CHECK(predict_proba(Estimator{ConstantScore{0.25}}, {1.0}) == 0.25);
  CHECK_THROWS_AS(predict_proba(Estimator{ConstantScore{1.25}}, {1.0}), ConfigError);
}
