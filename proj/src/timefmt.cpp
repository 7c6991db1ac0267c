#include "ppm/timefmt.hpp"

#include <array>
#include <cstdio>

#include "ppm/errors.hpp"

namespace ppm {
namespace {

// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 + static_cast<unsigned>(d) - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

struct Cursor {
  std::string_view s;
  std::size_t pos = 0;
  bool done() const { return pos >= s.size(); }
  char peek() const { return s[pos]; }
};

int read_digits(Cursor& c, int min_digits, int max_digits, const char* what) {
  int value = 0;
  int n = 0;
  while (!c.done() && n < max_digits && c.peek() >= '0' && c.peek() <= '9') {
    value = value * 10 + (c.peek() - '0');
    ++c.pos;
    ++n;
  }
  if (n < min_digits)
    throw DataError(std::string("timestamp: expected ") + what + " in '" + std::string(c.s) + "'");
  return value;
}

// Fractional seconds, normalized to milliseconds (extra digits truncated).
int read_fraction_ms(Cursor& c) {
  int digits[6] = {0, 0, 0, 0, 0, 0};
  int n = 0;
  while (!c.done() && c.peek() >= '0' && c.peek() <= '9') {
    if (n < 6) digits[n] = c.peek() - '0';
    ++c.pos;
    ++n;
  }
  if (n == 0) throw DataError("timestamp: expected fractional seconds in '" + std::string(c.s) + "'");
  return digits[0] * 100 + digits[1] * 10 + digits[2];
}

Timestamp assemble(int y, int mo, int d, int h, int mi, int s, int ms) {
  if (mo < 1 || mo > 12) throw DataError("timestamp: month out of range");
  if (d < 1 || d > 31) throw DataError("timestamp: day out of range");
  if (h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60)
    throw DataError("timestamp: time of day out of range");
  const std::int64_t days = days_from_civil(y, mo, d);
  return ((days * 24 + h) * 60 + mi) * 60000 + s * 1000 + ms;
}

Timestamp parse_iso8601(std::string_view text) {
  Cursor c{text};
  const int y = read_digits(c, 4, 4, "year");
  auto expect = [&](char ch) {
    if (c.done() || c.peek() != ch)
      throw DataError("timestamp: '" + std::string(text) + "' is not ISO-8601");
    ++c.pos;
  };
  expect('-');
  const int mo = read_digits(c, 2, 2, "month");
  expect('-');
  const int d = read_digits(c, 2, 2, "day");
  int h = 0, mi = 0, s = 0, ms = 0;
  if (!c.done()) {
    if (c.peek() != 'T' && c.peek() != ' ')
      throw DataError("timestamp: '" + std::string(text) + "' is not ISO-8601");
    ++c.pos;
    h = read_digits(c, 2, 2, "hour");
    expect(':');
    mi = read_digits(c, 2, 2, "minute");
    expect(':');
    s = read_digits(c, 2, 2, "second");
    if (!c.done() && c.peek() == '.') {
      ++c.pos;
      ms = read_fraction_ms(c);
    }
    if (!c.done() && c.peek() == 'Z') ++c.pos;
  }
  if (!c.done()) throw DataError("timestamp: trailing characters in '" + std::string(text) + "'");
  return assemble(y, mo, d, h, mi, s, ms);
}

}  // namespace

Timestamp parse_timestamp(std::string_view text, const std::string& format) {
  if (format == "iso8601") return parse_iso8601(text);

  Cursor c{text};
  int y = 1970, mo = 1, d = 1, h = 0, mi = 0, s = 0, ms = 0;
  for (std::size_t i = 0; i < format.size(); ++i) {
    if (format[i] == '%' && i + 1 < format.size()) {
      ++i;
      switch (format[i]) {
        case 'Y': y = read_digits(c, 4, 4, "year (%Y)"); break;
        case 'm': mo = read_digits(c, 1, 2, "month (%m)"); break;
        case 'd': d = read_digits(c, 1, 2, "day (%d)"); break;
        case 'H': h = read_digits(c, 1, 2, "hour (%H)"); break;
        case 'M': mi = read_digits(c, 1, 2, "minute (%M)"); break;
        case 'S': s = read_digits(c, 1, 2, "second (%S)"); break;
        case 'f': ms = read_fraction_ms(c); break;
        case '%':
          if (c.done() || c.peek() != '%') throw DataError("timestamp: expected '%'");
          ++c.pos;
          break;
        default:
          throw ConfigError(std::string("timestamp format: unsupported token %") + format[i]);
      }
    } else {
      if (c.done() || c.peek() != format[i])
        throw DataError("timestamp: '" + std::string(text) + "' does not match format '" + format + "'");
      ++c.pos;
    }
  }
  if (!c.done()) throw DataError("timestamp: trailing characters in '" + std::string(text) + "'");
  return assemble(y, mo, d, h, mi, s, ms);
}

CivilTime civil_from_timestamp(Timestamp ms) {
  std::int64_t days = ms / 86400000;
  std::int64_t rem = ms % 86400000;
  if (rem < 0) {
    rem += 86400000;
    --days;
  }
  CivilTime c;
  civil_from_days(days, c.year, c.month, c.day);
  c.hour = static_cast<int>(rem / 3600000);
  c.minute = static_cast<int>(rem / 60000 % 60);
  c.second = static_cast<int>(rem / 1000 % 60);
  c.millisecond = static_cast<int>(rem % 1000);
  c.weekday = static_cast<int>(((days % 7) + 7 + 3) % 7);  // 1970-01-01 was a Thursday
  return c;
}

std::string format_iso8601(Timestamp ms) {
  std::int64_t days = ms / 86400000;
  std::int64_t rem = ms % 86400000;
  if (rem < 0) {
    rem += 86400000;
    --days;
  }
  int y, mo, d;
  civil_from_days(days, y, mo, d);
  const int h = static_cast<int>(rem / 3600000);
  const int mi = static_cast<int>(rem / 60000 % 60);
  const int s = static_cast<int>(rem / 1000 % 60);
  const int frac = static_cast<int>(rem % 1000);
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", y, mo, d, h, mi, s, frac);
  return std::string(buf.data());
}

}  // namespace ppm
