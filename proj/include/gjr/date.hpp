#pragma once

#include <chrono>
#include <optional>
#include <string>

namespace gjr {

using Date = std::chrono::year_month_day;

// Strict YYYY-MM-DD; nullopt on anything else or an invalid calendar day.
std::optional<Date> parse_iso_date(const std::string& s);
std::string format_iso_date(const Date& d);

// Weekdays in (from, to]; negative if to < from.
int trading_days_between(const Date& from, const Date& to);

}  // namespace gjr
