/*
 * Copyright 2026 The widir Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "widir/time.hpp"

#include <cstdio>
#include <stdexcept>
#include <string>

namespace widir {
namespace {

struct Civil {
  long long year;
  unsigned month;
  unsigned day;
};

// Howard Hinnant's civil-from-days.
Civil CivilFromDays(Day z) {
  z += 719468;
  const Day era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long long y = static_cast<long long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return {y + (m <= 2), m, d};
}

int ParseFixed(std::string_view s, std::size_t pos, std::size_t len) {
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    const char c = s[i];
    if (c < '0' || c > '9') throw std::invalid_argument("bad date/time '" + std::string(s) + "'");
    v = v * 10 + (c - '0');
  }
  return v;
}

}  // namespace

Day DaysFromCivil(int year, unsigned month, unsigned day) {
  const long long y = static_cast<long long>(year) - (month <= 2);
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<Day>(doe) - 719468;
}

std::string FormatDay(Day d) {
  const Civil c = CivilFromDays(d);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02u", c.year, c.month, c.day);
  return buf;
}

Day ParseDay(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw std::invalid_argument("bad date '" + std::string(text) + "', expected YYYY-MM-DD");
  }
  const int y = ParseFixed(text, 0, 4);
  const int m = ParseFixed(text, 5, 2);
  const int d = ParseFixed(text, 8, 2);
  if (m < 1 || m > 12 || d < 1 || d > 31) {
    throw std::invalid_argument("bad date '" + std::string(text) + "'");
  }
  return DaysFromCivil(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

std::string FormatTimestamp(Timestamp t) {
  const Day d = DayOf(t);
  const std::int64_t sec = t - DayStart(d);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", FormatDay(d).c_str(),
                static_cast<int>(sec / 3600), static_cast<int>(sec / 60 % 60),
                static_cast<int>(sec % 60));
  return buf;
}

Timestamp ParseTimestamp(std::string_view text) {
  if (text.size() != 20 || text[10] != 'T' || text[13] != ':' || text[16] != ':' ||
      text[19] != 'Z') {
    throw std::invalid_argument("bad timestamp '" + std::string(text) +
                                "', expected YYYY-MM-DDTHH:MM:SSZ");
  }
  const Day d = ParseDay(text.substr(0, 10));
  const int h = ParseFixed(text, 11, 2);
  const int mi = ParseFixed(text, 14, 2);
  const int s = ParseFixed(text, 17, 2);
  if (h > 23 || mi > 59 || s > 59) {
    throw std::invalid_argument("bad timestamp '" + std::string(text) + "'");
  }
  return DayStart(d) + h * 3600 + mi * 60 + s;
}

}  // namespace widir
