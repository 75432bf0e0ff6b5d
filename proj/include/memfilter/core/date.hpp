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

#ifndef MEMFILTER_CORE_DATE_HPP_
#define MEMFILTER_CORE_DATE_HPP_

#include <chrono>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace memfilter {

// Calendar date with whole-day arithmetic and no time zone. Stored as days
// since 1970-01-01 so comparison and differences are integer operations.
class Date {
 public:
  constexpr Date() = default;

  static Date from_ymd(int year, unsigned month, unsigned day);
  static Date from_days(std::int32_t days_since_epoch) {
    Date d;
    d.days_ = days_since_epoch;
    return d;
  }
  // Strict ISO-8601 "YYYY-MM-DD". Throws ParseError (line 0) on failure.
  static Date parse(std::string_view iso);
  // Last calendar day of the given month.
  static Date end_of_month(int year, unsigned month);

  std::int32_t days_since_epoch() const { return days_; }
  std::chrono::year_month_day ymd() const;
  // 0 = Monday ... 6 = Sunday.
  unsigned weekday_index() const;
  bool is_weekend() const { return weekday_index() >= 5; }

  std::string iso() const;

  Date plus_days(std::int32_t n) const { return from_days(days_ + n); }
  friend std::int32_t operator-(Date a, Date b) { return a.days_ - b.days_; }
  friend auto operator<=>(Date, Date) = default;

 private:
  std::int32_t days_ = 0;
};

// Returns false instead of throwing; used by loaders that report row context.
bool try_parse_date(std::string_view iso, Date* out);

}  // namespace memfilter

template <>
struct std::hash<memfilter::Date> {
  std::size_t operator()(memfilter::Date d) const noexcept {
    return std::hash<std::int32_t>{}(d.days_since_epoch());
  }
};

#endif  // MEMFILTER_CORE_DATE_HPP_
