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

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace widir {

// Decimal fixed-point currency with two fractional digits.
class Money {
 public:
  constexpr Money() = default;

  static constexpr Money FromCents(std::int64_t cents) { return Money(cents); }
  static constexpr Money FromUnits(std::int64_t units) { return Money(units * 100); }
  // Rounds half away from zero to the nearest cent.
  static Money FromDouble(double units);
  // Accepts "12", "12.3", "12.34", optionally with a leading '-'.
  static Money Parse(std::string_view text);

  constexpr std::int64_t cents() const { return cents_; }
  constexpr double units() const { return static_cast<double>(cents_) / 100.0; }
  std::string ToString() const;

  constexpr Money operator+(Money o) const { return Money(cents_ + o.cents_); }
  constexpr Money operator-(Money o) const { return Money(cents_ - o.cents_); }
  constexpr Money operator*(std::int64_t k) const { return Money(cents_ * k); }
  constexpr Money& operator+=(Money o) {
    cents_ += o.cents_;
    return *this;
  }
  constexpr Money& operator-=(Money o) {
    cents_ -= o.cents_;
    return *this;
  }
  constexpr auto operator<=>(const Money&) const = default;

 private:
  constexpr explicit Money(std::int64_t cents) : cents_(cents) {}
  std::int64_t cents_ = 0;
};

}  // namespace widir
