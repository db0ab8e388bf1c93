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

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace widir {

// UTC epoch seconds.
using Timestamp = std::int64_t;
// Days since 1970-01-01 UTC; a day starts at UTC midnight.
using Day = std::int64_t;

inline constexpr std::int64_t kSecondsPerDay = 86400;

constexpr Day DayOf(Timestamp t) {
  return t >= 0 ? t / kSecondsPerDay : -((-t + kSecondsPerDay - 1) / kSecondsPerDay);
}
constexpr Timestamp DayStart(Day d) { return d * kSecondsPerDay; }

Day DaysFromCivil(int year, unsigned month, unsigned day);

// "YYYY-MM-DDTHH:MM:SSZ"
std::string FormatTimestamp(Timestamp t);
Timestamp ParseTimestamp(std::string_view text);

// "YYYY-MM-DD"
std::string FormatDay(Day d);
Day ParseDay(std::string_view text);

}  // namespace widir
