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
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "widir/money.hpp"
#include "widir/time.hpp"

namespace widir {

// Contests open for joining this long before the match starts.
inline constexpr Timestamp kJoinLeadSeconds = 36 * 3600;

enum class ContestType : std::uint8_t { kPublic = 0, kSpecial = 1, kMega = 2 };
inline constexpr int kNumContestTypes = 3;

std::string_view ContestTypeName(ContestType type);
ContestType ParseContestType(std::string_view name);

struct PrizeTier {
  int rank_from = 1;
  int rank_to = 1;
  Money prize_per_rank;

  bool operator==(const PrizeTier&) const = default;
};

struct PrizeDistribution {
  std::vector<PrizeTier> tiers;

  Money TotalPayout() const;
  // Rank of the last paid position, 0 when nothing is paid.
  int PaidRanks() const;
  // Prize for a finishing rank; zero outside the paid tiers.
  Money PrizeForRank(int rank) const;

  bool operator==(const PrizeDistribution&) const = default;
};

struct ContestSpec {
  std::string contest_id;
  std::string template_id;
  std::string match_id;
  Money entry_fee;
  Money prize_money;
  int contest_size = 2;
  ContestType contest_type = ContestType::kPublic;
  PrizeDistribution prize_distribution;
  bool guaranteed = false;
  bool multi_entry = false;

  bool operator==(const ContestSpec&) const = default;
};

struct JoinRecord {
  std::string player_id;
  std::string contest_id;
  std::string match_id;
  Timestamp joining_time = 0;
  Money entry_fee_paid;
  Money prize_won;

  bool operator==(const JoinRecord&) const = default;
};

struct MatchRecord {
  std::string match_id;
  Timestamp start_time = 0;
  std::vector<std::string> contest_ids;

  bool operator==(const MatchRecord&) const = default;
};

// Ground-truth preference model of a synthetic player.
struct PlayerArchetype {
  double preferred_log_entry_fee = 0.0;
  double fee_sensitivity = 0.0;
  double size_preference = 0.5;
  double risk_appetite = 0.5;
  double popularity_weight = 0.0;
  double activity_rate = 1.0;
  double multi_entry_propensity = 0.0;

  bool operator==(const PlayerArchetype&) const = default;
};

struct PlayerProfile {
  std::string player_id;
  PlayerArchetype archetype;

  bool operator==(const PlayerProfile&) const = default;
};

// Returns one message per violated ContestSpec/PrizeDistribution rule; empty
// when the contest is well formed.
std::vector<std::string> ValidateContest(const ContestSpec& spec);

struct PrizeStats {
  double top_prize_fraction = 0.0;
  double winner_fraction = 0.0;
};

// Throws std::invalid_argument when prize_money <= 0.
PrizeStats ComputePrizeStats(const PrizeDistribution& distribution, int contest_size,
                             Money prize_money);

// Indexed, read-only view over contest instances.
class ContestCatalog {
 public:
  ContestCatalog() = default;
  explicit ContestCatalog(std::vector<ContestSpec> contests);

  const std::vector<ContestSpec>& contests() const { return contests_; }
  const ContestSpec* Find(std::string_view contest_id) const;
  // First instance seen for the template; all instances share its features.
  const ContestSpec* FindTemplate(std::string_view template_id) const;
  const ContestSpec& Template(std::string_view template_id) const;
  // Templates with at least one instance in the match, sorted by template_id.
  const std::vector<std::string>& MatchTemplates(std::string_view match_id) const;
  std::vector<std::string> MatchIds() const;

 private:
  std::vector<ContestSpec> contests_;
  std::unordered_map<std::string, std::size_t> by_contest_;
  std::unordered_map<std::string, std::size_t> by_template_;
  std::unordered_map<std::string, std::vector<std::string>> match_templates_;
};

struct Dataset {
  std::vector<ContestSpec> contests;
  std::vector<MatchRecord> matches;
  std::vector<JoinRecord> joins;
  std::vector<PlayerProfile> players;
};

// Referential-integrity and JoinRecord invariant scan. Empty when consistent.
std::vector<std::string> CheckIntegrity(const Dataset& data);

}  // namespace widir
