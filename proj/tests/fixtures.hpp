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

#include <string>
#include <vector>

#include "widir/domain.hpp"
#include "widir/generator.hpp"

namespace widir::testing {

inline ContestSpec MakeContest(std::string contest_id, std::string template_id,
                               std::string match_id, double fee, double prize, int size,
                               ContestType type = ContestType::kPublic) {
  ContestSpec c;
  c.contest_id = std::move(contest_id);
  c.template_id = std::move(template_id);
  c.match_id = std::move(match_id);
  c.entry_fee = Money::FromDouble(fee);
  c.prize_money = Money::FromDouble(prize);
  c.contest_size = size;
  c.contest_type = type;
  c.prize_distribution.tiers = {{1, 1, c.prize_money}};
  return c;
}

inline JoinRecord MakeJoin(std::string player, const ContestSpec& c, Timestamp t,
                           double prize_won = 0.0) {
  return {std::move(player), c.contest_id, c.match_id, t, c.entry_fee,
          Money::FromDouble(prize_won)};
}

// A small generated world shared by the slower tests.
inline GeneratorConfig SmallWorld() {
  GeneratorConfig g;
  g.players = 300;
  g.matches = 30;
  g.templates_per_match = 12;
  g.template_catalog_size = 30;
  g.days = 42;
  g.match_participation = 0.2;
  return g;
}

}  // namespace widir::testing
