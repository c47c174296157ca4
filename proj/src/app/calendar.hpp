#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

#include "stpp/geometry.hpp"

namespace stpp::app {

// "YYYY-MM-DD", optionally followed by "THH:MM" or "THH:MM:SS" (or a space
// instead of 'T'). Returns fractional days since 1970-01-01.
std::optional<double> parse_iso_date(std::string_view text);

// Days since 1970-01-01 for a valid calendar date string; throws ConfigError.
double iso_date_days(const std::string& text);

std::string format_date(std::chrono::sys_days day);

// Length of one unit of `resolution` in days. Abstract has no calendar length.
double days_per_unit(TimeResolution resolution);

struct IsoWeek {
  int year = 0;
  unsigned week = 0;
};
IsoWeek iso_week(std::chrono::sys_days day);
std::chrono::sys_days iso_week_start(IsoWeek week);

}  // namespace stpp::app
