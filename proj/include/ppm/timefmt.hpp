#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ppm {

// Milliseconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

// Parses a timestamp according to a strftime-like format string supporting
// %Y %m %d %H %M %S %f (fractional seconds, 1-6 digits) and literal
// characters. The format name "iso8601" accepts YYYY-MM-DDTHH:MM:SS with an
// optional fractional part and optional trailing 'Z'. Throws DataError on
// mismatch. All times are taken as UTC.
Timestamp parse_timestamp(std::string_view text, const std::string& format);

// YYYY-MM-DDTHH:MM:SS.mmmZ
std::string format_iso8601(Timestamp ms);

// UTC calendar breakdown of a timestamp.
struct CivilTime {
  int year = 1970;
  int month = 1;   // 1-12
  int day = 1;     // 1-31
  int hour = 0;    // 0-23
  int minute = 0;
  int second = 0;
  int millisecond = 0;
  int weekday = 0;  // 0 = Monday .. 6 = Sunday
};

CivilTime civil_from_timestamp(Timestamp ms);

}  // namespace ppm
