#include "calendar.hpp"

#include <fmt/format.h>

#include <charconv>

#include "stpp/errors.hpp"

namespace stpp::app {
namespace {

using namespace std::chrono;

bool read_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (text[i] < '0' || text[i] > '9') return false;
  }
  std::from_chars(text.data() + pos, text.data() + pos + len, out);
  return true;
}

}  // namespace

std::optional<double> parse_iso_date(std::string_view text) {
  int y = 0, m = 0, d = 0;
  if (!read_int(text, 0, 4, y) || text.size() < 10 || text[4] != '-' || !read_int(text, 5, 2, m) ||
      text[7] != '-' || !read_int(text, 8, 2, d)) {
    return std::nullopt;
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  double days = static_cast<double>(sys_days{ymd}.time_since_epoch().count());
  if (text.size() == 10) return days;
  if (text[10] != 'T' && text[10] != ' ') return std::nullopt;
  int hh = 0, mm = 0, ss = 0;
  if (!read_int(text, 11, 2, hh) || text.size() < 16 || text[13] != ':' || !read_int(text, 14, 2, mm)) {
    return std::nullopt;
  }
  if (text.size() == 19) {
    if (text[16] != ':' || !read_int(text, 17, 2, ss)) return std::nullopt;
  } else if (text.size() != 16) {
    return std::nullopt;
  }
  if (hh > 23 || mm > 59 || ss > 59) return std::nullopt;
  return days + (hh * 3600.0 + mm * 60.0 + ss) / 86400.0;
}

double iso_date_days(const std::string& text) {
  const auto v = parse_iso_date(text);
  if (!v) throw ConfigError(fmt::format("'{}' is not a YYYY-MM-DD date", text));
  return *v;
}

std::string format_date(sys_days day) {
  const year_month_day ymd{day};
  return fmt::format("{:04}-{:02}-{:02}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

double days_per_unit(TimeResolution resolution) {
  switch (resolution) {
    case TimeResolution::Day: return 1.0;
    case TimeResolution::Week: return 7.0;
    case TimeResolution::Month: return 365.2425 / 12.0;
    case TimeResolution::Year: return 365.2425;
    case TimeResolution::Abstract: break;
  }
  throw ConfigError("abstract time units have no calendar length");
}

IsoWeek iso_week(sys_days day) {
  // The ISO week belongs to the year containing its Thursday.
  const weekday wd{day};
  const auto iso_index = static_cast<int>((wd.c_encoding() + 6) % 7);  // Monday = 0
  const sys_days thursday = day - days{iso_index} + days{3};
  const year y = year_month_day{thursday}.year();
  const sys_days jan1{y / January / 1};
  const auto ordinal = (thursday - jan1).count();
  return {static_cast<int>(y), static_cast<unsigned>(ordinal / 7 + 1)};
}

sys_days iso_week_start(IsoWeek week) {
  // Week 1 contains January 4th.
  const sys_days jan4{year{week.year} / January / 4};
  const weekday wd{jan4};
  const auto iso_index = static_cast<int>((wd.c_encoding() + 6) % 7);
  return jan4 - days{iso_index} + weeks{week.week - 1};
}

}  // namespace stpp::app
