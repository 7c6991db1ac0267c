#include "ppm/encoding.hpp"

#include <algorithm>

#include <json.hpp>

#include "ppm/errors.hpp"

namespace ppm {

namespace {

// The dedicated event fields join the attribute namespace under these names.
const std::string kActivity = "activity";
const std::string kResource = "resource";

}  // namespace

void EncoderState::build_layout() {
  feature_names_.clear();
  for (const auto& [attr, values] : vocab_) {
    for (const std::string& v : values) feature_names_.push_back(attr + "=" + v);
    feature_names_.push_back(attr + "=other");
  }
  n_count_cols_ = static_cast<int>(feature_names_.size());
  for (const std::string& attr : numeric_)
    for (const char* stat : {"_min", "_max", "_mean", "_sum"})
      feature_names_.push_back(attr + stat);
  for (const char* t : {"event_nr", "hour", "weekday", "month", "since_start_s", "since_last_s"})
    feature_names_.push_back(t);
}

EncoderState EncoderState::fit(const EventLog& train) {
  if (train.empty()) throw DataError("encoder: empty training log");

  std::map<std::string, std::map<std::string, int>> counts;  // categorical attr -> value -> freq
  std::map<std::string, bool> is_numeric;                    // event attr -> kind, must be consistent
  counts[kActivity];
  bool any_resource = false;

  for (const Trace& trace : train.traces()) {
    for (const Event& e : trace.events) {
      ++counts[kActivity][e.activity];
      if (e.resource) {
        any_resource = true;
        ++counts[kResource][*e.resource];
      }
      for (const auto& [name, value] : e.attrs) {
        if (name == kActivity || name == kResource)
          throw DataError("encoder: attribute name '" + name + "' is reserved");
        const bool numeric = std::holds_alternative<double>(value);
        auto [it, fresh] = is_numeric.emplace(name, numeric);
        if (!fresh && it->second != numeric)
          throw DataError("encoder: attribute '" + name + "' mixes numeric and categorical values");
        if (!numeric) ++counts[name][std::get<std::string>(value)];
      }
    }
  }
  if (!any_resource) counts.erase(kResource);

  EncoderState state;
  for (const auto& [attr, freq] : counts) {
    std::vector<std::string> kept;
    for (const auto& [value, n] : freq)
      if (n >= kRareThreshold) kept.push_back(value);
    state.vocab_[attr] = std::move(kept);  // map iteration already sorted
  }
  for (const auto& [name, numeric] : is_numeric)
    if (numeric) state.numeric_.push_back(name);
  state.build_layout();
  return state;
}

FeatureVector EncoderState::encode(const Prefix& prefix) const {
  FeatureVector out(static_cast<std::size_t>(dim()), 0.0);
  const auto events = prefix.events();

  std::size_t col = 0;
  for (const auto& [attr, values] : vocab_) {
    const std::size_t base = col;
    const std::size_t other = base + values.size();
    for (const Event& e : events) {
      const std::string* v = nullptr;
      if (attr == kActivity) {
        v = &e.activity;
      } else if (attr == kResource) {
        if (e.resource) v = &*e.resource;
      } else {
        auto it = e.attrs.find(attr);
        if (it != e.attrs.end())
          if (const std::string* s = std::get_if<std::string>(&it->second)) v = s;
      }
      if (!v) continue;  // absent categorical: counts nothing
      auto pos = std::lower_bound(values.begin(), values.end(), *v);
      if (pos != values.end() && *pos == *v)
        out[base + static_cast<std::size_t>(pos - values.begin())] += 1.0;
      else
        out[other] += 1.0;
    }
    col = other + 1;
  }

  for (const std::string& attr : numeric_) {
    // Forward-fill within the prefix, zero before the first observation.
    double current = 0.0;
    double mn = 0.0, mx = 0.0, sum = 0.0;
    bool first = true;
    for (const Event& e : events) {
      auto it = e.attrs.find(attr);
      if (it != e.attrs.end())
        if (const double* d = std::get_if<double>(&it->second)) current = *d;
      if (first) {
        mn = mx = current;
        first = false;
      } else {
        mn = std::min(mn, current);
        mx = std::max(mx, current);
      }
      sum += current;
    }
    out[col++] = mn;
    out[col++] = mx;
    out[col++] = sum / static_cast<double>(events.size());
    out[col++] = sum;
  }

  const Event& last = prefix.last();
  const CivilTime ct = civil_from_timestamp(last.timestamp);
  out[col++] = static_cast<double>(prefix.len);
  out[col++] = static_cast<double>(ct.hour);
  out[col++] = static_cast<double>(ct.weekday);
  out[col++] = static_cast<double>(ct.month);
  out[col++] = static_cast<double>(last.timestamp - prefix.trace->start_time()) / 1000.0;
  const Timestamp prev =
      prefix.len > 1 ? events[static_cast<std::size_t>(prefix.len) - 2].timestamp : last.timestamp;
  out[col++] = static_cast<double>(last.timestamp - prev) / 1000.0;
  return out;
}

std::string EncoderState::to_json() const {
  nlohmann::json j;
  j["categorical"] = nlohmann::json::object();
  for (const auto& [attr, values] : vocab_) j["categorical"][attr] = values;
  j["numeric"] = numeric_;
  return j.dump(2);
}

EncoderState EncoderState::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("encoder: invalid JSON: ") + e.what());
  }
  EncoderState state;
  try {
    for (const auto& [attr, values] : j.at("categorical").items()) {
      std::vector<std::string> v = values.get<std::vector<std::string>>();
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
      state.vocab_[attr] = std::move(v);
    }
    state.numeric_ = j.at("numeric").get<std::vector<std::string>>();
    std::sort(state.numeric_.begin(), state.numeric_.end());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("encoder: bad layout JSON: ") + e.what());
  }
  state.build_layout();
  return state;
}

}  // namespace ppm
