#include "ppm/event_log.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ppm/csv.hpp"
#include "ppm/errors.hpp"
#include "ppm/rng.hpp"

namespace ppm {

void EventLog::add_trace(Trace trace) {
  if (trace.events.empty()) throw DataError("trace '" + trace.case_id + "' is empty");
  for (std::size_t i = 1; i < trace.events.size(); ++i)
    if (trace.events[i].timestamp < trace.events[i - 1].timestamp)
      throw DataError("trace '" + trace.case_id + "' has decreasing timestamps");
  if (index_.count(trace.case_id)) throw DataError("duplicate case id '" + trace.case_id + "'");
  index_[trace.case_id] = traces_.size();
  traces_.push_back(std::move(trace));
}

const Trace* EventLog::find(const std::string& case_id) const {
  auto it = index_.find(case_id);
  return it == index_.end() ? nullptr : &traces_[it->second];
}

void EventLog::set_label(const std::string& case_id, bool undesired) {
  if (!index_.count(case_id)) throw DataError("label for unknown case '" + case_id + "'");
  labels_[case_id] = undesired;
}

std::optional<bool> EventLog::label(const std::string& case_id) const {
  auto it = labels_.find(case_id);
  if (it == labels_.end()) return std::nullopt;
  return it->second;
}

bool EventLog::fully_labeled() const {
  if (traces_.empty()) return false;
  for (const auto& t : traces_)
    if (!labels_.count(t.case_id)) return false;
  return true;
}

namespace {

bool parse_number(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

std::string format_number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

LabelRule label_rule_from_json(const nlohmann::json& j) {
  LabelRule rule;
  const std::string type = j.value("type", "");
  if (type == "column") {
    rule.kind = LabelRule::Kind::Column;
    if (!j.contains("column")) throw ConfigError("label rule: 'column' key required");
    rule.name = j.at("column").get<std::string>();
  } else if (type == "activity") {
    rule.kind = LabelRule::Kind::ActivityOccurs;
    if (!j.contains("activity")) throw ConfigError("label rule: 'activity' key required");
    rule.name = j.at("activity").get<std::string>();
    rule.cut = j.value("cut", true);
  } else {
    throw ConfigError("label rule: type must be 'column' or 'activity'");
  }
  return rule;
}

}  // namespace

LogSchema schema_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("schema: invalid JSON: ") + e.what());
  }
  LogSchema s;
  for (const char* key : {"case_id_col", "activity_col", "timestamp_col", "timestamp_format"})
    if (!j.contains(key)) throw ConfigError(std::string("schema: missing key '") + key + "'");
  s.case_id_col = j.at("case_id_col").get<std::string>();
  s.activity_col = j.at("activity_col").get<std::string>();
  s.timestamp_col = j.at("timestamp_col").get<std::string>();
  s.timestamp_format = j.at("timestamp_format").get<std::string>();
  if (j.contains("resource_col") && !j.at("resource_col").is_null())
    s.resource_col = j.at("resource_col").get<std::string>();
  if (j.contains("label") && !j.at("label").is_null()) s.label = label_rule_from_json(j.at("label"));
  return s;
}

LogSchema schema_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("schema: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return schema_from_json_text(ss.str());
}

LogSchema canonical_schema(bool labeled) {
  LogSchema s;
  s.case_id_col = "case_id";
  s.activity_col = "activity";
  s.timestamp_col = "timestamp";
  s.timestamp_format = "iso8601";
  s.resource_col = "resource";
  if (labeled) s.label = LabelRule{LabelRule::Kind::Column, "_label", true};
  return s;
}

EventLog parse_event_log(std::istream& in, const LogSchema& schema) {
  const CsvTable table = read_csv(in);

  const int case_col = table.column(schema.case_id_col);
  const int act_col = table.column(schema.activity_col);
  const int ts_col = table.column(schema.timestamp_col);
  if (case_col < 0) throw ConfigError("schema: missing case id column '" + schema.case_id_col + "'");
  if (act_col < 0) throw ConfigError("schema: missing activity column '" + schema.activity_col + "'");
  if (ts_col < 0) throw ConfigError("schema: missing timestamp column '" + schema.timestamp_col + "'");
  int res_col = -1;
  if (schema.resource_col) {
    res_col = table.column(*schema.resource_col);
    if (res_col < 0) throw ConfigError("schema: missing resource column '" + *schema.resource_col + "'");
  }

  // Remaining columns become attributes; numeric iff every non-empty value
  // in the column parses as a number.
  std::vector<int> attr_cols;
  std::vector<bool> attr_numeric;
  for (int c = 0; c < static_cast<int>(table.header.size()); ++c) {
    if (c == case_col || c == act_col || c == ts_col || c == res_col) continue;
    bool numeric = true;
    for (const auto& row : table.rows) {
      const std::string& v = row.fields[static_cast<std::size_t>(c)];
      double d;
      if (!v.empty() && !parse_number(v, d)) {
        numeric = false;
        break;
      }
    }
    attr_cols.push_back(c);
    attr_numeric.push_back(numeric);
  }

  std::vector<Trace> order;                     // first-appearance order
  std::map<std::string, std::size_t> case_idx;  // case id -> index in order
  for (const auto& row : table.rows) {
    const std::string& case_id = row.fields[static_cast<std::size_t>(case_col)];
    if (case_id.empty()) throw DataError("line " + std::to_string(row.line) + ": empty case id");

    Event e;
    e.activity = row.fields[static_cast<std::size_t>(act_col)];
    if (e.activity.empty()) throw DataError("line " + std::to_string(row.line) + ": empty activity");
    try {
      e.timestamp = parse_timestamp(row.fields[static_cast<std::size_t>(ts_col)], schema.timestamp_format);
    } catch (const DataError& err) {
      throw DataError("line " + std::to_string(row.line) + ": " + err.what());
    }
    if (res_col >= 0) {
      const std::string& r = row.fields[static_cast<std::size_t>(res_col)];
      if (!r.empty()) e.resource = r;
    }
    for (std::size_t a = 0; a < attr_cols.size(); ++a) {
      const std::string& v = row.fields[static_cast<std::size_t>(attr_cols[a])];
      if (v.empty()) continue;
      if (attr_numeric[a]) {
        double d = 0;
        parse_number(v, d);
        e.attrs[table.header[static_cast<std::size_t>(attr_cols[a])]] = d;
      } else {
        e.attrs[table.header[static_cast<std::size_t>(attr_cols[a])]] = v;
      }
    }

    auto it = case_idx.find(case_id);
    if (it == case_idx.end()) {
      case_idx[case_id] = order.size();
      order.push_back(Trace{case_id, {std::move(e)}});
    } else {
      order[it->second].events.push_back(std::move(e));
    }
  }

  EventLog log;
  for (auto& trace : order) {
    std::stable_sort(trace.events.begin(), trace.events.end(),
                     [](const Event& a, const Event& b) { return a.timestamp < b.timestamp; });
    log.add_trace(std::move(trace));
  }
  return log;
}

namespace {

bool attr_truthiness(const AttrValue& v, const std::string& case_id) {
  if (const double* d = std::get_if<double>(&v)) {
    if (*d == 0.0) return false;
    if (*d == 1.0) return true;
    throw DataError("case '" + case_id + "': label value " + format_number(*d) + " is not 0/1");
  }
  const std::string& s = std::get<std::string>(v);
  if (s == "true" || s == "True" || s == "1") return true;
  if (s == "false" || s == "False" || s == "0") return false;
  throw DataError("case '" + case_id + "': label value '" + s + "' is not boolean");
}

}  // namespace

EventLog label_outcomes(const EventLog& log, const LabelRule& rule) {
  EventLog out;
  for (const Trace& trace : log.traces()) {
    if (rule.kind == LabelRule::Kind::Column) {
      std::optional<bool> value;
      Trace cleaned{trace.case_id, {}};
      for (const Event& e : trace.events) {
        Event copy = e;
        auto it = copy.attrs.find(rule.name);
        if (it != copy.attrs.end()) {
          const bool b = attr_truthiness(it->second, trace.case_id);
          if (value && *value != b)
            throw DataError("case '" + trace.case_id + "': label column '" + rule.name +
                            "' is inconsistent within the case");
          value = b;
          copy.attrs.erase(it);
        }
        cleaned.events.push_back(std::move(copy));
      }
      if (!value)
        throw DataError("case '" + trace.case_id + "': label column '" + rule.name + "' never set");
      out.add_trace(std::move(cleaned));
      out.set_label(trace.case_id, *value);
    } else {
      int hit = -1;
      for (int i = 0; i < trace.length(); ++i) {
        if (trace.events[static_cast<std::size_t>(i)].activity == rule.name) {
          hit = i;
          break;
        }
      }
      if (hit < 0) {
        out.add_trace(trace);
        out.set_label(trace.case_id, false);
      } else if (!rule.cut) {
        out.add_trace(trace);
        out.set_label(trace.case_id, true);
      } else if (hit == 0) {
        // Nothing observable before the label becomes known; drop the case.
      } else {
        Trace cut{trace.case_id,
                  std::vector<Event>(trace.events.begin(), trace.events.begin() + hit)};
        out.add_trace(std::move(cut));
        out.set_label(trace.case_id, true);
      }
    }
  }
  return out;
}

EventLog truncate_log(const EventLog& log, double percentile) {
  if (!(percentile > 0.0 && percentile <= 1.0)) throw ConfigError("truncate: percentile must be in (0,1]");
  if (log.empty()) throw DataError("truncate: empty log");

  std::vector<int> lengths;
  lengths.reserve(log.size());
  for (const Trace& t : log.traces()) lengths.push_back(t.length());
  std::sort(lengths.begin(), lengths.end());
  // Nearest-rank: smallest length covering >= percentile of all traces.
  const double n = static_cast<double>(lengths.size());
  int max_len = lengths.back();
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if ((i + 1 == lengths.size() || lengths[i + 1] != lengths[i]) &&
        static_cast<double>(i + 1) / n >= percentile) {
      max_len = lengths[i];
      break;
    }
  }

  EventLog out;
  for (const Trace& t : log.traces()) {
    Trace copy{t.case_id, {}};
    const int keep = std::min(t.length(), max_len);
    copy.events.assign(t.events.begin(), t.events.begin() + keep);
    out.add_trace(std::move(copy));
    if (auto l = log.label(t.case_id)) out.set_label(t.case_id, *l);
  }
  return out;
}

DatasetSplit temporal_split(const EventLog& log, std::uint64_t seed) {
  const std::size_t n = log.size();
  if (n < 5) throw DataError("split: need at least 5 cases, got " + std::to_string(n));

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Trace& ta = log.traces()[a];
    const Trace& tb = log.traces()[b];
    if (ta.start_time() != tb.start_time()) return ta.start_time() < tb.start_time();
    return ta.case_id < tb.case_id;
  });

  const std::size_t n_pool = n * 4 / 5;
  const std::size_t n_train = n_pool * 4 / 5;
  std::vector<std::size_t> pool(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_pool));
  Rng rng(seed);
  rng.shuffle(pool);

  std::set<std::size_t> train_set(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::set<std::size_t> thres_set(pool.begin() + static_cast<std::ptrdiff_t>(n_train), pool.end());

  Timestamp cutoff = 0;
  bool have_cutoff = false;
  for (std::size_t i = n_pool; i < n; ++i) {
    const Timestamp st = log.traces()[order[i]].start_time();
    if (!have_cutoff || st < cutoff) {
      cutoff = st;
      have_cutoff = true;
    }
  }
  if (!have_cutoff) throw DataError("split: empty test partition");

  DatasetSplit split;
  auto emit = [&](EventLog& dst, const Trace& src, bool clip) {
    Trace copy{src.case_id, {}};
    for (const Event& e : src.events) {
      if (clip && e.timestamp >= cutoff) break;  // events overlapping the test window
      copy.events.push_back(e);
    }
    if (copy.events.empty()) return;  // entire case overlaps; dropped with its label
    dst.add_trace(std::move(copy));
    if (auto l = log.label(src.case_id)) dst.set_label(src.case_id, *l);
  };

  // Keep each partition in start-time order for reproducible output.
  for (std::size_t i = 0; i < n; ++i) {
    const Trace& t = log.traces()[order[i]];
    if (train_set.count(order[i]))
      emit(split.train, t, true);
    else if (thres_set.count(order[i]))
      emit(split.thres, t, true);
    else
      emit(split.test, t, false);
  }

  if (split.train.empty() || split.thres.empty() || split.test.empty())
    throw DataError("split: a partition is empty after the time-overlap discard");
  return split;
}

std::vector<Prefix> prefixes(const Trace& trace, int max_len) {
  if (max_len < 1) throw ConfigError("prefixes: max_len must be >= 1");
  const int n = std::min(trace.length(), max_len);
  std::vector<Prefix> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) out.push_back(Prefix{&trace, k});
  return out;
}

void write_event_log(const EventLog& log, std::ostream& out) {
  std::set<std::string> attr_names;
  for (const Trace& t : log.traces())
    for (const Event& e : t.events)
      for (const auto& [name, value] : e.attrs) attr_names.insert(name);

  const bool labeled = log.fully_labeled();
  std::vector<std::string> header = {"case_id", "activity", "timestamp", "resource"};
  if (labeled) header.push_back("_label");
  header.insert(header.end(), attr_names.begin(), attr_names.end());
  write_csv_row(out, header);

  std::vector<std::string> row;
  for (const Trace& t : log.traces()) {
    for (const Event& e : t.events) {
      row.clear();
      row.push_back(t.case_id);
      row.push_back(e.activity);
      row.push_back(format_iso8601(e.timestamp));
      row.push_back(e.resource.value_or(""));
      if (labeled) row.push_back(*log.label(t.case_id) ? "1" : "0");
      for (const std::string& name : attr_names) {
        auto it = e.attrs.find(name);
        if (it == e.attrs.end()) {
          row.emplace_back();
        } else if (const double* d = std::get_if<double>(&it->second)) {
          row.push_back(format_number(*d));
        } else {
          row.push_back(std::get<std::string>(it->second));
        }
      }
      write_csv_row(out, row);
    }
  }
}

EventLog read_event_log_file(const std::string& path, const LogSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open log file '" + path + "'");
  EventLog log = parse_event_log(in, schema);
  if (schema.label) log = label_outcomes(log, *schema.label);
  return log;
}

void write_event_log_file(const EventLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  write_event_log(log, out);
}

}  // namespace ppm
