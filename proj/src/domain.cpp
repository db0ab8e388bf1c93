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

#include "widir/domain.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

namespace widir {

std::string_view ContestTypeName(ContestType type) {
  switch (type) {
    case ContestType::kPublic:
      return "Public";
    case ContestType::kSpecial:
      return "Special";
    case ContestType::kMega:
      return "Mega";
  }
  return "?";
}

ContestType ParseContestType(std::string_view name) {
  if (name == "Public") return ContestType::kPublic;
  if (name == "Special") return ContestType::kSpecial;
  if (name == "Mega") return ContestType::kMega;
  throw std::invalid_argument("unknown contest_type '" + std::string(name) + "'");
}

Money PrizeDistribution::TotalPayout() const {
  Money total;
  for (const PrizeTier& t : tiers) total += t.prize_per_rank * (t.rank_to - t.rank_from + 1);
  return total;
}

int PrizeDistribution::PaidRanks() const { return tiers.empty() ? 0 : tiers.back().rank_to; }

Money PrizeDistribution::PrizeForRank(int rank) const {
  for (const PrizeTier& t : tiers) {
    if (rank >= t.rank_from && rank <= t.rank_to) return t.prize_per_rank;
  }
  return Money();
}

std::vector<std::string> ValidateContest(const ContestSpec& spec) {
  std::vector<std::string> violations;
  if (spec.contest_size < 2) violations.push_back("contest_size must be >= 2");
  if (spec.entry_fee < Money()) violations.push_back("entry_fee must be >= 0");
  if (spec.prize_money < Money()) violations.push_back("prize_money must be >= 0");

  const auto& tiers = spec.prize_distribution.tiers;
  if (tiers.empty()) {
    violations.push_back("prize_distribution has no tiers");
    return violations;
  }
  bool contiguous = tiers.front().rank_from == 1;
  bool ordered_ranks = true;
  bool non_increasing = true;
  bool non_negative = true;
  for (std::size_t i = 0; i < tiers.size(); ++i) {
    if (tiers[i].rank_to < tiers[i].rank_from) ordered_ranks = false;
    if (tiers[i].prize_per_rank < Money()) non_negative = false;
    if (i > 0) {
      if (tiers[i].rank_from != tiers[i - 1].rank_to + 1) contiguous = false;
      if (tiers[i].prize_per_rank > tiers[i - 1].prize_per_rank) non_increasing = false;
    }
  }
  if (!contiguous) violations.push_back("prize_distribution tiers not contiguous from rank 1");
  if (!ordered_ranks) violations.push_back("prize_distribution tier has rank_to < rank_from");
  if (tiers.back().rank_to > spec.contest_size) {
    violations.push_back("prize_distribution exceeds contest_size");
  }
  if (!non_negative) violations.push_back("prize_per_rank must be >= 0");
  if (!non_increasing) violations.push_back("prize_per_rank not non-increasing");
  if (spec.prize_distribution.TotalPayout() > spec.prize_money) {
    violations.push_back("prize_distribution total payout exceeds prize_money");
  }
  return violations;
}

PrizeStats ComputePrizeStats(const PrizeDistribution& distribution, int contest_size,
                             Money prize_money) {
  if (prize_money <= Money()) throw std::invalid_argument("prize_money must be > 0");
  if (distribution.tiers.empty() || contest_size < 1) {
    throw std::invalid_argument("prize distribution is empty");
  }
  PrizeStats stats;
  stats.top_prize_fraction = static_cast<double>(distribution.tiers.front().prize_per_rank.cents()) /
                             static_cast<double>(prize_money.cents());
  stats.winner_fraction =
      static_cast<double>(distribution.PaidRanks()) / static_cast<double>(contest_size);
  return stats;
}

ContestCatalog::ContestCatalog(std::vector<ContestSpec> contests) : contests_(std::move(contests)) {
  std::map<std::string, std::set<std::string>> per_match;
  for (std::size_t i = 0; i < contests_.size(); ++i) {
    const ContestSpec& c = contests_[i];
    if (!by_contest_.emplace(c.contest_id, i).second) {
      throw std::invalid_argument("duplicate contest_id '" + c.contest_id + "'");
    }
    by_template_.emplace(c.template_id, i);
    per_match[c.match_id].insert(c.template_id);
  }
  for (auto& [match, templates] : per_match) {
    match_templates_[match] = std::vector<std::string>(templates.begin(), templates.end());
  }
}

const ContestSpec* ContestCatalog::Find(std::string_view contest_id) const {
  const auto it = by_contest_.find(std::string(contest_id));
  return it == by_contest_.end() ? nullptr : &contests_[it->second];
}

const ContestSpec* ContestCatalog::FindTemplate(std::string_view template_id) const {
  const auto it = by_template_.find(std::string(template_id));
  return it == by_template_.end() ? nullptr : &contests_[it->second];
}

const ContestSpec& ContestCatalog::Template(std::string_view template_id) const {
  const ContestSpec* spec = FindTemplate(template_id);
  if (spec == nullptr) throw std::out_of_range("unknown template_id '" + std::string(template_id) + "'");
  return *spec;
}

const std::vector<std::string>& ContestCatalog::MatchTemplates(std::string_view match_id) const {
  static const std::vector<std::string> kEmpty;
  const auto it = match_templates_.find(std::string(match_id));
  return it == match_templates_.end() ? kEmpty : it->second;
}

std::vector<std::string> ContestCatalog::MatchIds() const {
  std::vector<std::string> ids;
  ids.reserve(match_templates_.size());
  for (const auto& [match, templates] : match_templates_) ids.push_back(match);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<std::string> CheckIntegrity(const Dataset& data) {
  std::vector<std::string> problems;
  std::map<std::string, const ContestSpec*> contests;
  for (const ContestSpec& c : data.contests) {
    if (!contests.emplace(c.contest_id, &c).second) {
      problems.push_back("duplicate contest " + c.contest_id);
    }
    for (const std::string& v : ValidateContest(c)) problems.push_back(c.contest_id + ": " + v);
  }
  std::map<std::string, const MatchRecord*> matches;
  for (const MatchRecord& m : data.matches) {
    matches.emplace(m.match_id, &m);
    if (m.contest_ids.empty()) problems.push_back("match " + m.match_id + " has no contests");
    std::set<std::string> mega_templates;
    for (const std::string& id : m.contest_ids) {
      const auto it = contests.find(id);
      if (it == contests.end()) {
        problems.push_back("match " + m.match_id + " references unknown contest " + id);
      } else if (it->second->match_id != m.match_id) {
        problems.push_back("contest " + id + " listed under foreign match " + m.match_id);
      } else if (it->second->contest_type == ContestType::kMega) {
        mega_templates.insert(it->second->template_id);
      }
    }
    if (mega_templates.size() != 1) {
      problems.push_back("match " + m.match_id + " has " + std::to_string(mega_templates.size()) +
                         " Mega templates");
    }
  }
  for (const JoinRecord& j : data.joins) {
    const auto c = contests.find(j.contest_id);
    const auto m = matches.find(j.match_id);
    if (c == contests.end()) {
      problems.push_back("join references unknown contest " + j.contest_id);
      continue;
    }
    if (m == matches.end()) {
      problems.push_back("join references unknown match " + j.match_id);
      continue;
    }
    if (c->second->match_id != j.match_id) {
      problems.push_back("join match mismatch for contest " + j.contest_id);
    }
    if (j.joining_time >= m->second->start_time) {
      problems.push_back("join by " + j.player_id + " at or after start of " + j.match_id);
    }
    if (j.entry_fee_paid != c->second->entry_fee) {
      problems.push_back("join by " + j.player_id + " paid a fee different from " + j.contest_id);
    }
  }
  return problems;
}

}  // namespace widir
