// Copyright 2026 The Memfilter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "memfilter/core/date.hpp"

#include <charconv>
#include <cstdio>

#include "memfilter/core/error.hpp"

namespace memfilter {

namespace chr = std::chrono;

Date Date::from_ymd(int year, unsigned month, unsigned day) {
  const chr::year_month_day ymd{chr::year{year}, chr::month{month},
                                chr::day{day}};
  if (!ymd.ok()) {
    throw ValidationError("invalid calendar date " + std::to_string(year) +
                          "-" + std::to_string(month) + "-" +
                          std::to_string(day));
  }
  return from_days(static_cast<std::int32_t>(
      chr::sys_days{ymd}.time_since_epoch().count()));
}

Date Date::end_of_month(int year, unsigned month) {
  const chr::year_month_day_last last{chr::year{year},
                                      chr::month_day_last{chr::month{month}}};
  if (!last.ok()) {
    throw ValidationError("invalid month " + std::to_string(month));
  }
  return from_days(static_cast<std::int32_t>(
      chr::sys_days{last}.time_since_epoch().count()));
}

chr::year_month_day Date::ymd() const {
  return chr::year_month_day{chr::sys_days{chr::days{days_}}};
}

unsigned Date::weekday_index() const {
  // 1970-01-01 was a Thursday (index 3).
  const int r = ((days_ % 7) + 7 + 3) % 7;
  return static_cast<unsigned>(r);
}

std::string Date::iso() const {
  const auto d = ymd();
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

bool try_parse_date(std::string_view iso, Date* out) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return false;
  auto field = [&](std::size_t pos, std::size_t len, int* v) {
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (iso[i] < '0' || iso[i] > '9') return false;
    }
    auto [p, ec] = std::from_chars(iso.data() + pos, iso.data() + pos + len, *v);
    return ec == std::errc{} && p == iso.data() + pos + len;
  };
  int y = 0, m = 0, d = 0;
  if (!field(0, 4, &y) || !field(5, 2, &m) || !field(8, 2, &d)) return false;
  const chr::year_month_day ymd{chr::year{y}, chr::month{unsigned(m)},
                                chr::day{unsigned(d)}};
  if (!ymd.ok()) return false;
  *out = Date::from_days(static_cast<std::int32_t>(
      chr::sys_days{ymd}.time_since_epoch().count()));
  return true;
}

Date Date::parse(std::string_view iso) {
  Date d;
  if (!try_parse_date(iso, &d)) {
    throw ParseError("unparsable date '" + std::string(iso) + "'", 0);
  }
  return d;
}

}  // namespace memfilter
