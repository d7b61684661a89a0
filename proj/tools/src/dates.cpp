#include "dates.hpp"

#include <chrono>
#include <cstdio>
#include <stdexcept>

#include "epirenew/text_io.hpp"

namespace epirenew::tool {

int parse_date(const std::string& iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
    throw std::invalid_argument("expected ISO date YYYY-MM-DD, got: " + iso);
  }
  int y = static_cast<int>(parse_long(iso.substr(0, 4)));
  int m = static_cast<int>(parse_long(iso.substr(5, 2)));
  int d = static_cast<int>(parse_long(iso.substr(8, 2)));
  std::chrono::year_month_day ymd{std::chrono::year(y), std::chrono::month(unsigned(m)),
                                  std::chrono::day(unsigned(d))};
  if (!ymd.ok()) throw std::invalid_argument("invalid calendar date: " + iso);
  auto days = std::chrono::sys_days(ymd).time_since_epoch().count();
  return static_cast<int>(days);
}

std::string format_date(int days) {
  std::chrono::year_month_day ymd{std::chrono::sys_days(std::chrono::days(days))};
  char buf[11];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace epirenew::tool
