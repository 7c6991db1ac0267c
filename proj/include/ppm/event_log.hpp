#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ppm/timefmt.hpp"

namespace ppm {

// Attribute values are auto-typed per column: numeric if every non-empty
// value in the column parses as a number, categorical otherwise.
using AttrValue = std::variant<double, std::string>;

struct Event {
  std::string activity;
  Timestamp timestamp = 0;
  std::optional<std::string> resource;
  std::map<std::string, AttrValue> attrs;

  bool operator==(const Event&) const = default;
};

// One case: a non-empty, time-ordered event sequence.
struct Trace {
  std::string case_id;
  std::vector<Event> events;

  int length() const { return static_cast<int>(events.size()); }
  Timestamp start_time() const { return events.front().timestamp; }
  bool operator==(const Trace&) const = default;
};

// The first `len` events of a trace. Traces are immutable once built, so a
// view is safe to pass around.
struct Prefix {
  const Trace* trace = nullptr;
  int len = 0;

  std::span<const Event> events() const { return {trace->events.data(), static_cast<std::size_t>(len)}; }
  const Event& last() const { return trace->events[static_cast<std::size_t>(len) - 1]; }
};

// Traces keyed by case id plus optional per-case outcome labels
// (true = undesired outcome).
class EventLog {
public:
  void add_trace(Trace trace);  // throws DataError on duplicate/empty/misordered

  const std::vector<Trace>& traces() const { return traces_; }
  const Trace* find(const std::string& case_id) const;
  std::size_t size() const { return traces_.size(); }
  bool empty() const { return traces_.empty(); }

  void set_label(const std::string& case_id, bool undesired);  // case must exist
  std::optional<bool> label(const std::string& case_id) const;
  bool fully_labeled() const;
  const std::map<std::string, bool>& labels() const { return labels_; }

  bool operator==(const EventLog&) const = default;

private:
  std::vector<Trace> traces_;  // insertion order, preserved through serialization
  std::map<std::string, std::size_t> index_;
  std::map<std::string, bool> labels_;
};

struct DatasetSplit {
  EventLog train;
  EventLog thres;
  EventLog test;
};

// How a case gets its outcome label.
struct LabelRule {
  enum class Kind {
    Column,          // boolean column, constant within a case
    ActivityOccurs,  // label true iff the activity appears in the trace
  };
  Kind kind = Kind::Column;
  std::string name;  // column name or activity name
  // For ActivityOccurs: drop the matching event and everything after it, so
  // no prefix trivially reveals the label.
  bool cut = true;
};

struct LogSchema {
  std::string case_id_col;
  std::string activity_col;
  std::string timestamp_col;
  std::string timestamp_format;  // strftime-like subset, or "iso8601"
  std::optional<std::string> resource_col;
  std::optional<LabelRule> label;
};

LogSchema schema_from_json_file(const std::string& path);
LogSchema schema_from_json_text(const std::string& text);

// Schema matching write_event_log output. `labeled` adds the _label rule.
LogSchema canonical_schema(bool labeled);

// Reads a UTF-8 CSV with a header row into an event log. Events are grouped
// by case id and sorted by timestamp, stable on ties by file order. Columns
// other than the mandatory ones become attributes. Does not apply the
// schema's label rule; see label_outcomes.
EventLog parse_event_log(std::istream& in, const LogSchema& schema);

// Applies the schema's label rule. Column rules consume the column (it is
// removed from event attributes so it cannot leak into features). Activity
// rules with cut=true drop the first matching event and its suffix; traces
// cut to length zero are removed entirely.
EventLog label_outcomes(const EventLog& log, const LabelRule& rule);

// Truncates every trace to the smallest length M covering at least
// `percentile` of all traces (nearest-rank). Labels are preserved.
EventLog truncate_log(const EventLog& log, double percentile);

// Temporal split: cases ordered by start time (ties by case id), the first
// 80% form a pool which a seeded shuffle divides 80/20 into train/thres; the
// remaining 20% of all cases are the test set. Train/thres events at or
// after the earliest test-case start are dropped; traces emptied by the drop
// are removed together with their labels.
DatasetSplit temporal_split(const EventLog& log, std::uint64_t seed);

// hd^k for k = 1 .. min(trace length, max_len).
std::vector<Prefix> prefixes(const Trace& trace, int max_len);

// Canonical CSV: case_id, activity, timestamp (ISO-8601 UTC), resource,
// _label (when the log is labeled), then attribute columns in lexicographic
// order. Round-trips through parse_event_log + label_outcomes.
void write_event_log(const EventLog& log, std::ostream& out);

EventLog read_event_log_file(const std::string& path, const LogSchema& schema);
void write_event_log_file(const EventLog& log, const std::string& path);

}  // namespace ppm
