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

#include "widir/money.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace widir {

Money Money::FromDouble(double units) {
  return Money(static_cast<std::int64_t>(std::llround(units * 100.0)));
}

Money Money::Parse(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty currency value");
  bool negative = false;
  std::size_t i = 0;
  if (text[0] == '-') {
    negative = true;
    i = 1;
  }
  std::int64_t whole = 0;
  std::int64_t frac = 0;
  int frac_digits = 0;
  bool seen_digit = false;
  bool in_frac = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '.' && !in_frac) {
      in_frac = true;
      continue;
    }
    if (c < '0' || c > '9') {
      throw std::invalid_argument("bad currency value '" + std::string(text) + "'");
    }
    seen_digit = true;
    if (in_frac) {
      if (++frac_digits > 2) {
        throw std::invalid_argument("more than two decimals in '" + std::string(text) + "'");
      }
      frac = frac * 10 + (c - '0');
    } else {
      whole = whole * 10 + (c - '0');
    }
  }
  if (!seen_digit) throw std::invalid_argument("bad currency value '" + std::string(text) + "'");
  if (frac_digits == 1) frac *= 10;
  const std::int64_t cents = whole * 100 + frac;
  return Money(negative ? -cents : cents);
}

std::string Money::ToString() const {
  const std::int64_t abs = cents_ < 0 ? -cents_ : cents_;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%lld.%02lld", cents_ < 0 ? "-" : "",
                static_cast<long long>(abs / 100), static_cast<long long>(abs % 100));
  return buf;
}

}  // namespace widir
