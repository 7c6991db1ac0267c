#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <ctime>

#include "ppm/encoding.hpp"
#include "ppm/errors.hpp"
#include "ppm/event_log.hpp"
#include "ppm/rng.hpp"

using namespace ppm;

namespace {

Event ev(std::string act, Timestamp ts) { return Event{std::move(act), ts, {}, {}}; }

int column(const EncoderState& s, const std::string& name) {
  const auto& names = s.feature_names();
  auto it = std::find(names.begin(), names.end(), name);
  REQUIRE(it != names.end());
  return static_cast<int>(it - names.begin());
}

bool has_column(const EncoderState& s, const std::string& name) {
  const auto& names = s.feature_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

}  // namespace

TEST_CASE("vocabulary keeps values seen ten times and collapses rarer ones") {
  EventLog train;
  Trace nine{"c1", {}};
  for (int i = 0; i < 9; ++i) nine.events.push_back(ev("rare", i));
  Trace ten{"c2", {}};
  for (int i = 0; i < 10; ++i) ten.events.push_back(ev("common", i));
  train.add_trace(nine);
  train.add_trace(ten);

  EncoderState enc = EncoderState::fit(train);
  CHECK(has_column(enc, "activity=common"));
  CHECK_FALSE(has_column(enc, "activity=rare"));
  CHECK(has_column(enc, "activity=other"));

  // The nine occurrences land in the "other" column.
  Prefix p{&train.traces()[0], 9};
  FeatureVector v = enc.encode(p);
  CHECK(v[static_cast<std::size_t>(column(enc, "activity=other"))] == 9.0);
  CHECK(v[static_cast<std::size_t>(column(enc, "activity=common"))] == 0.0);
}

TEST_CASE("all-rare vocabulary still has the other column") {
  EventLog train;
  Trace t{"c1", {}};
  for (int i = 0; i < 5; ++i) t.events.push_back(ev("a" + std::to_string(i), i));
  train.add_trace(t);
  EncoderState enc = EncoderState::fit(train);
  CHECK(enc.vocabularies().at("activity").empty());
  CHECK(has_column(enc, "activity=other"));
  FeatureVector v = enc.encode(Prefix{&train.traces()[0], 5});
  CHECK(v[static_cast<std::size_t>(column(enc, "activity=other"))] == 5.0);
}

TEST_CASE("activity counts accumulate over the prefix") {
  EventLog train;
  Trace t{"c1", {}};
  for (int i = 0; i < 10; ++i) t.events.push_back(ev("A", i * 1000));
  for (int i = 0; i < 10; ++i) t.events.push_back(ev("B", 10000 + i * 1000));
  train.add_trace(t);
  EncoderState enc = EncoderState::fit(train);

  Trace probe{"p", {ev("A", 0), ev("A", 1000), ev("B", 2000)}};
  FeatureVector v = enc.encode(Prefix{&probe, 3});
  CHECK(v[static_cast<std::size_t>(column(enc, "activity=A"))] == 2.0);
  CHECK(v[static_cast<std::size_t>(column(enc, "activity=B"))] == 1.0);
}

TEST_CASE("single-event prefix has zero elapsed times") {
  EventLog train;
  Trace t{"c1", {}};
  for (int i = 0; i < 10; ++i) t.events.push_back(ev("A", i));
  train.add_trace(t);
  EncoderState enc = EncoderState::fit(train);

  Trace probe{"p", {ev("A", 1456824607250)}};
  FeatureVector v = enc.encode(Prefix{&probe, 1});
  CHECK(v[static_cast<std::size_t>(column(enc, "since_start_s"))] == 0.0);
  CHECK(v[static_cast<std::size_t>(column(enc, "since_last_s"))] == 0.0);
  CHECK(v[static_cast<std::size_t>(column(enc, "event_nr"))] == 1.0);
}

TEST_CASE("temporal features agree with gmtime") {
  EventLog train;
  Trace t{"c1", {}};
  for (int i = 0; i < 10; ++i) t.events.push_back(ev("A", i));
  train.add_trace(t);
  EncoderState enc = EncoderState::fit(train);

  const Timestamp ts = parse_timestamp("2016-03-01T09:30:07Z", "iso8601");
  Trace probe{"p", {ev("A", ts - 90000), ev("A", ts)}};
  FeatureVector v = enc.encode(Prefix{&probe, 2});

  std::time_t secs = static_cast<std::time_t>(ts / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  CHECK(v[static_cast<std::size_t>(column(enc, "hour"))] == tm.tm_hour);
  CHECK(v[static_cast<std::size_t>(column(enc, "weekday"))] == (tm.tm_wday + 6) % 7);
  CHECK(v[static_cast<std::size_t>(column(enc, "month"))] == tm.tm_mon + 1);
  CHECK(v[static_cast<std::size_t>(column(enc, "since_start_s"))] == 90.0);
  CHECK(v[static_cast<std::size_t>(column(enc, "since_last_s"))] == 90.0);
  CHECK(v[static_cast<std::size_t>(column(enc, "event_nr"))] == 2.0);
}

TEST_CASE("numeric attribute seen only at the first event is carried forward") {
  EventLog train;
  Trace t{"c1", {}};
  for (int i = 0; i < 10; ++i) {
    Event e = ev("A", i * 1000);
    e.attrs["amount"] = 7.0;
    t.events.push_back(e);
  }
  train.add_trace(t);
  EncoderState enc = EncoderState::fit(train);

  Trace probe{"p", {ev("A", 0), ev("A", 1000), ev("A", 2000)}};
  probe.events[0].attrs["amount"] = 4.0;
  FeatureVector v = enc.encode(Prefix{&probe, 3});
  CHECK(v[static_cast<std::size_t>(column(enc, "amount_min"))] == 4.0);
  CHECK(v[static_cast<std::size_t>(column(enc, "amount_max"))] == 4.0);
  CHECK(v[static_cast<std::size_t>(column(enc, "amount_mean"))] == 4.0);
  CHECK(v[static_cast<std::size_t>(column(enc, "amount_sum"))] == 12.0);
}

TEST_CASE("numeric attribute absent before first observation imputes zero") {
  EventLog train;
  Trace t{"c1", {}};
  for (int i = 0; i < 10; ++i) {
    Event e = ev("A", i * 1000);
    e.attrs["amount"] = 1.0;
    t.events.push_back(e);
  }
  train.add_trace(t);
  EncoderState enc = EncoderState::fit(train);

  Trace probe{"p", {ev("A", 0), ev("A", 1000)}};
  probe.events[1].attrs["amount"] = 6.0;
  FeatureVector v = enc.encode(Prefix{&probe, 2});
  CHECK(v[static_cast<std::size_t>(column(enc, "amount_min"))] == 0.0);
  CHECK(v[static_cast<std::size_t>(column(enc, "amount_max"))] == 6.0);
  CHECK(v[static_cast<std::size_t>(column(enc, "amount_mean"))] == 3.0);
  CHECK(v[static_cast<std::size_t>(column(enc, "amount_sum"))] == 6.0);
}

TEST_CASE("encoding is pure and dimension-stable on unseen values") {
  EventLog train;
  Trace t{"c1", {}};
  for (int i = 0; i < 20; ++i) {
    Event e = ev(i % 2 ? "A" : "B", i * 1000);
    e.attrs["res"] = std::string(i % 2 ? "alice" : "bob");
    t.events.push_back(e);
  }
  train.add_trace(t);
  EncoderState enc = EncoderState::fit(train);
  REQUIRE(has_column(enc, "activity=A"));

  Trace probe{"p", {ev("NEVER_SEEN", 0), ev("A", 500)}};
  probe.events[0].attrs["res"] = std::string("carol");
  FeatureVector v1 = enc.encode(Prefix{&probe, 2});
  FeatureVector v2 = enc.encode(Prefix{&probe, 2});
  CHECK(v1 == v2);
  CHECK(static_cast<int>(v1.size()) == enc.dim());
  CHECK(v1[static_cast<std::size_t>(column(enc, "activity=other"))] == 1.0);
  CHECK(v1[static_cast<std::size_t>(column(enc, "activity=A"))] == 1.0);
  CHECK(v1[static_cast<std::size_t>(column(enc, "res=other"))] == 1.0);
}

TEST_CASE("count columns grow monotonically along a trace") {
  Rng rng(99);
  EventLog train;
  for (int c = 0; c < 8; ++c) {
    Trace t{"c" + std::to_string(c), {}};
    for (int i = 0; i < 15; ++i) {
      Event e = ev("act" + std::to_string(rng.next_below(4)), i * 60000);
      if (rng.next_double() < 0.7) e.attrs["ch"] = std::string(rng.next_below(2) ? "web" : "branch");
      t.events.push_back(e);
    }
    train.add_trace(t);
  }
  EncoderState enc = EncoderState::fit(train);

  const Trace& probe = train.traces()[0];
  FeatureVector prev;
  for (int k = 1; k <= probe.length(); ++k) {
    FeatureVector cur = enc.encode(Prefix{&probe, k});
    if (k > 1)
      for (int c = 0; c < enc.n_count_cols(); ++c)
        CHECK(prev[static_cast<std::size_t>(c)] <= cur[static_cast<std::size_t>(c)]);
    prev = std::move(cur);
  }
}

TEST_CASE("mixed-type attribute is rejected") {
  EventLog train;
  Trace t{"c1", {}};
  Event a = ev("A", 0);
  a.attrs["x"] = 1.0;
  Event b = ev("A", 1000);
  b.attrs["x"] = std::string("one");
  t.events = {a, b};
  train.add_trace(t);
  CHECK_THROWS_AS(EncoderState::fit(train), DataError);
}

TEST_CASE("encoder state round-trips through json") {
  EventLog train;
  Trace t{"c1", {}};
  for (int i = 0; i < 12; ++i) {
    Event e = ev(i % 2 ? "A" : "B", i * 1000);
    e.attrs["amount"] = static_cast<double>(i);
    e.attrs["ch"] = std::string("web");
    t.events.push_back(e);
  }
  train.add_trace(t);
  EncoderState enc = EncoderState::fit(train);
  EncoderState back = EncoderState::from_json(enc.to_json());
  CHECK(back == enc);
  CHECK(back.feature_names() == enc.feature_names());
  CHECK(back.encode(Prefix{&train.traces()[0], 5}) == enc.encode(Prefix{&train.traces()[0], 5}));

  CHECK_THROWS_AS(EncoderState::from_json("{"), ConfigError);
  CHECK_THROWS_AS(EncoderState::from_json("{}"), ConfigError);
}
