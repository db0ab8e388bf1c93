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

#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "widir/domain.hpp"
#include "widir/features.hpp"
#include "widir/model.hpp"

namespace widir {

struct RankingPayload {
  std::string player_id;
  std::string match_id;
  // Every live template, best first.
  std::vector<std::pair<std::string, float>> ranked;
  Timestamp generated_at = 0;
  std::string model_version;

  std::string Serialize() const;
  static RankingPayload Parse(std::string_view line);
  bool operator==(const RankingPayload&) const = default;
};

// Write side of an online store.
class RankingStore {
 public:
  virtual ~RankingStore() = default;
  virtual void Put(RankingPayload payload) = 0;
};

// Players with a join in the 30 days ending the day before `as_of_day`.
std::set<std::string> ActivePlayers(std::span<const JoinRecord> joins, Day as_of_day);

struct BatchOptions {
  std::string model_version;
  Timestamp generated_at = 0;
  int max_write_attempts = 3;
};

// One payload per (active player, upcoming match), published to `store` when
// given. Throws DataError when a store write keeps failing.
std::vector<RankingPayload> RunBatch(const WidirParams& params, const FeatureSnapshot& snapshot,
                                     const NormalizationStats& stats,
                                     std::span<const MatchRecord> upcoming,
                                     const ContestCatalog& catalog,
                                     const std::set<std::string>& active,
                                     const BatchOptions& options, RankingStore* store);

}  // namespace widir
