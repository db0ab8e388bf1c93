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

#include "widir/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>

#include "widir/data_io.hpp"
#include "widir/error.hpp"

namespace widir {
namespace {

constexpr int kMegaContestSize = 100000;
constexpr double kMinLogSize = 0.69314718055994531;  // log 2
constexpr double kMaxLogSize = 11.512925464970229;   // log 1e5

constexpr std::int64_t kFeeGridUnits[] = {1, 5, 10, 25, 49, 99, 199, 499, 999, 1999};
constexpr double kFeeGridWeights[] = {6, 10, 12, 12, 10, 9, 7, 5, 3, 2};
constexpr int kSizeGrid[] = {2, 3, 4, 5, 10, 20, 50, 100, 500, 1000, 5000};
constexpr double kSizeGridWeights[] = {14, 6, 6, 6, 10, 10, 10, 10, 8, 6, 4};

std::size_t WeightedIndex(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = rng.Uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return weights.size() - 1;
}

std::string PaddedId(char prefix, long long n, int width) {
  std::string digits = std::to_string(n);
  if (static_cast<int>(digits.size()) < width) {
    digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  }
  return std::string(1, prefix) + digits;
}

// Ranks 1, 2, 3, 4-10, 11-50, 51-200, ... capped at `winners`; per-rank weight
// decays geometrically across tiers.
PrizeDistribution TopHeavy(std::int64_t pool_cents, int winners, double decay) {
  std::vector<std::pair<int, int>> bands;
  const int bounds[] = {1, 2, 3, 10, 50, 200, 1000, 5000, 20000, 100000};
  int from = 1;
  for (int b : bounds) {
    if (from > winners) break;
    const int to = std::min(b, winners);
    bands.emplace_back(from, to);
    from = to + 1;
  }
  double denom = 0.0;
  double w = 1.0;
  std::vector<double> weights;
  for (const auto& [lo, hi] : bands) {
    weights.push_back(w);
    denom += w * (hi - lo + 1);
    w *= decay;
  }
  PrizeDistribution d;
  for (std::size_t i = 0; i < bands.size(); ++i) {
    const auto cents = static_cast<std::int64_t>(std::floor(pool_cents * weights[i] / denom));
    if (cents <= 0) break;
    d.tiers.push_back({bands[i].first, bands[i].second, Money::FromCents(cents)});
  }
  return d;
}

ContestSpec MakeTemplate(std::string template_id, Money fee, int size, ContestType type,
                         bool guaranteed, bool multi_entry, double rake, int style, Rng& rng) {
  ContestSpec c;
  c.template_id = std::move(template_id);
  c.entry_fee = fee;
  c.contest_size = size;
  c.contest_type = type;
  c.guaranteed = guaranteed;
  c.multi_entry = multi_entry;
  const auto pool = static_cast<std::int64_t>(
      std::floor(static_cast<double>(fee.cents()) * size * (1.0 - rake)));
  if (size <= 3 || style == 0) {
    c.prize_distribution.tiers.push_back({1, 1, Money::FromCents(pool)});
  } else if (style == 1) {
    const int winners = size / 2;
    c.prize_distribution.tiers.push_back({1, winners, Money::FromCents(pool / winners)});
  } else {
    const double winner_fraction = rng.Uniform(0.1, 0.4);
    const int winners = std::max(2, static_cast<int>(std::lround(size * winner_fraction)));
    c.prize_distribution = TopHeavy(pool, winners, rng.Uniform(0.25, 0.6));
  }
  c.prize_money = c.prize_distribution.TotalPayout();
  return c;
}

}  // namespace

GeneratorConfig GeneratorConfig::FromKeyValue(const KeyValueConfig& kv) {
  kv.RequireKnownKeys({"players", "matches", "templates_per_match", "template_catalog_size",
                       "start_date", "days", "match_participation", "max_joins_per_match",
                       "archetype_segments", "activity_rate_mean", "fee_sensitivity_mean",
                       "popularity_weight_mean", "multi_entry_propensity_mean",
                       "archetype_jitter"});
  GeneratorConfig c;
  c.players = static_cast<int>(kv.GetInt("players", c.players));
  c.matches = static_cast<int>(kv.GetInt("matches", c.matches));
  c.templates_per_match = static_cast<int>(kv.GetInt("templates_per_match", c.templates_per_match));
  c.template_catalog_size =
      static_cast<int>(kv.GetInt("template_catalog_size", c.template_catalog_size));
  if (kv.Has("start_date")) {
    try {
      c.start_day = ParseDay(kv.GetString("start_date", ""));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("key 'start_date': ") + e.what());
    }
  }
  c.days = static_cast<int>(kv.GetInt("days", c.days));
  c.match_participation = kv.GetDouble("match_participation", c.match_participation);
  c.max_joins_per_match = static_cast<int>(kv.GetInt("max_joins_per_match", c.max_joins_per_match));
  c.archetype_segments = static_cast<int>(kv.GetInt("archetype_segments", c.archetype_segments));
  c.activity_rate_mean = kv.GetDouble("activity_rate_mean", c.activity_rate_mean);
  c.fee_sensitivity_mean = kv.GetDouble("fee_sensitivity_mean", c.fee_sensitivity_mean);
  c.popularity_weight_mean = kv.GetDouble("popularity_weight_mean", c.popularity_weight_mean);
  c.multi_entry_propensity_mean =
      kv.GetDouble("multi_entry_propensity_mean", c.multi_entry_propensity_mean);
  c.archetype_jitter = kv.GetDouble("archetype_jitter", c.archetype_jitter);
  c.Validate();
  return c;
}

KeyValueConfig GeneratorConfig::ToKeyValue() const {
  KeyValueConfig kv;
  kv.Set("players", std::to_string(players));
  kv.Set("matches", std::to_string(matches));
  kv.Set("templates_per_match", std::to_string(templates_per_match));
  kv.Set("template_catalog_size", std::to_string(template_catalog_size));
  kv.Set("start_date", FormatDay(start_day));
  kv.Set("days", std::to_string(days));
  kv.Set("match_participation", FormatDoubleShort(match_participation));
  kv.Set("max_joins_per_match", std::to_string(max_joins_per_match));
  kv.Set("archetype_segments", std::to_string(archetype_segments));
  kv.Set("activity_rate_mean", FormatDoubleShort(activity_rate_mean));
  kv.Set("fee_sensitivity_mean", FormatDoubleShort(fee_sensitivity_mean));
  kv.Set("popularity_weight_mean", FormatDoubleShort(popularity_weight_mean));
  kv.Set("multi_entry_propensity_mean", FormatDoubleShort(multi_entry_propensity_mean));
  kv.Set("archetype_jitter", FormatDoubleShort(archetype_jitter));
  return kv;
}

void GeneratorConfig::Validate() const {
  if (template_catalog_size <= 0) throw ConfigError("empty template catalog");
  if (days < 40) {
    throw ConfigError("date range of " + std::to_string(days) +
                      " days is shorter than 40 days (30-day feature windows)");
  }
  if (players < 1) throw ConfigError("players must be >= 1");
  if (matches < 0) throw ConfigError("matches must be >= 0");
  const int mega = std::max(1, template_catalog_size / 50);
  if (template_catalog_size - mega < 1) throw ConfigError("template catalog has no regular templates");
  if (templates_per_match < 2 || templates_per_match - 1 > template_catalog_size - mega) {
    throw ConfigError("templates_per_match must be in [2, " +
                      std::to_string(template_catalog_size - mega + 1) + "]");
  }
  if (match_participation < 0.0 || match_participation > 1.0) {
    throw ConfigError("match_participation must be in [0, 1]");
  }
  if (activity_rate_mean < 0.0 || activity_rate_mean > 20.0) {
    throw ConfigError("activity_rate_mean must be in [0, 20]");
  }
  if (max_joins_per_match < 1) throw ConfigError("max_joins_per_match must be >= 1");
  if (archetype_segments < 1) throw ConfigError("archetype_segments must be >= 1");
  if (fee_sensitivity_mean < 0.0 || popularity_weight_mean < 0.0 ||
      multi_entry_propensity_mean < 0.0 || archetype_jitter < 0.0) {
    throw ConfigError("archetype mixture parameters must be >= 0");
  }
}

ChoiceFeatures MakeChoiceFeatures(const ContestSpec& spec) {
  ChoiceFeatures f;
  f.log_entry_fee = std::log(std::max(spec.entry_fee.units(), 0.01));
  f.log_contest_size = std::log(static_cast<double>(spec.contest_size));
  f.size_score = std::clamp((f.log_contest_size - kMinLogSize) / (kMaxLogSize - kMinLogSize), 0.0, 1.0);
  f.top_prize_fraction = spec.prize_money > Money()
                             ? ComputePrizeStats(spec.prize_distribution, spec.contest_size,
                                                 spec.prize_money)
                                   .top_prize_fraction
                             : 0.0;
  f.multi_entry = spec.multi_entry;
  return f;
}

double ChoiceUtility(const PlayerArchetype& p, const ChoiceFeatures& c) {
  return -p.fee_sensitivity * std::abs(c.log_entry_fee - p.preferred_log_entry_fee) +
         p.size_preference * c.size_score + p.risk_appetite * c.top_prize_fraction +
         p.popularity_weight * c.log_contest_size;
}

std::vector<std::size_t> SampleJoinChoices(const PlayerArchetype& player,
                                           std::span<const ChoiceFeatures> contests,
                                           std::span<const double> log_boost, int max_joins,
                                           Rng& rng) {
  return SampleJoinChoices(player, contests, log_boost, max_joins, 0.0, rng);
}

std::vector<std::size_t> SampleJoinChoices(const PlayerArchetype& player,
                                           std::span<const ChoiceFeatures> contests,
                                           std::span<const double> log_boost, int max_joins,
                                           double outside_share, Rng& rng) {
  if (!(outside_share >= 0.0 && outside_share < 1.0)) {
    throw std::invalid_argument("outside_share must be in [0, 1)");
  }
  std::vector<std::size_t> picks;
  const int n = rng.TruncatedPoisson(player.activity_rate / (1.0 - outside_share), max_joins);
  if (n == 0 || contests.empty()) return picks;
  std::vector<double> utility(contests.size());
  double max_u = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < contests.size(); ++j) {
    utility[j] = ChoiceUtility(player, contests[j]);
    max_u = std::max(max_u, utility[j]);
  }
  const bool outside = outside_share > 0.0;
  const std::vector<double> untreated = utility;
  const double outside_offset = outside ? std::log(outside_share / (1.0 - outside_share)) : 0.0;
  if (!log_boost.empty()) {
    for (std::size_t j = 0; j < contests.size(); ++j) utility[j] += log_boost[j];
  }
  std::vector<char> used(contests.size(), 0);
  std::vector<std::size_t> reentry;  // joined multi-entry templates, first-join order
  for (int k = 0; k < n; ++k) {
    if (!reentry.empty() && rng.Bernoulli(player.multi_entry_propensity)) {
      if (outside && rng.Bernoulli(outside_share)) continue;
      picks.push_back(reentry[rng.Below(reentry.size())]);
      continue;
    }
    std::size_t best = contests.size();
    double best_value = 0.0;
    for (std::size_t j = 0; j < contests.size(); ++j) {
      if (used[j] && !contests[j].multi_entry) continue;
      const double v = utility[j] + rng.Gumbel();
      if (best == contests.size() || v > best_value) {
        best = j;
        best_value = v;
      }
    }
    if (best == contests.size()) break;
    if (outside) {
      // Set so an untreated attempt over the still-available templates ends
      // without a join with probability `outside_share`.
      double sum = 0.0;
      for (std::size_t j = 0; j < contests.size(); ++j) {
        if (used[j] && !contests[j].multi_entry) continue;
        sum += std::exp(untreated[j] - max_u);
      }
      if (max_u + std::log(sum) + outside_offset + rng.Gumbel() > best_value) continue;
    }
    if (!used[best]) {
      used[best] = 1;
      if (contests[best].multi_entry) reentry.push_back(best);
    }
    picks.push_back(best);
  }
  return picks;
}

std::vector<ContestSpec> GenerateTemplateCatalog(int count, Rng& rng) {
  if (count <= 0) throw std::invalid_argument("empty template catalog");
  const int mega = std::max(1, count / 50);
  std::vector<ContestSpec> templates;
  templates.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    std::string id = PaddedId('T', i + 1, 4);
    const double rake = 0.10 + 0.05 * static_cast<double>(rng.Below(3));
    if (i < mega) {
      const Money fee = Money::FromUnits(i % 2 == 0 ? 49 : 25);
      templates.push_back(MakeTemplate(std::move(id), fee, kMegaContestSize, ContestType::kMega,
                                       true, true, rake, 2, rng));
      continue;
    }
    const Money fee = Money::FromUnits(kFeeGridUnits[WeightedIndex(kFeeGridWeights, rng)]);
    const int size = kSizeGrid[WeightedIndex(kSizeGridWeights, rng)];
    const ContestType type = rng.Bernoulli(0.2) ? ContestType::kSpecial : ContestType::kPublic;
    const bool guaranteed = rng.Bernoulli(0.5);
    const bool multi_entry = size >= 10 && rng.Bernoulli(0.5);
    const int style = static_cast<int>(rng.Below(3));
    templates.push_back(
        MakeTemplate(std::move(id), fee, size, type, guaranteed, multi_entry, rake, style, rng));
  }
  return templates;
}

Schedule GenerateSchedule(std::span<const ContestSpec> templates, int matches,
                          int templates_per_match, Day first_day, int days,
                          std::string_view match_prefix, Rng& rng) {
  std::vector<std::size_t> mega;
  std::vector<std::size_t> regular;
  for (std::size_t i = 0; i < templates.size(); ++i) {
    (templates[i].contest_type == ContestType::kMega ? mega : regular).push_back(i);
  }
  if (mega.empty()) throw std::invalid_argument("template catalog has no Mega template");
  if (templates_per_match < 1 ||
      static_cast<std::size_t>(templates_per_match - 1) > regular.size()) {
    throw std::invalid_argument("not enough templates for templates_per_match");
  }
  constexpr int kStartHours[] = {10, 14, 19};
  Schedule schedule;
  for (int m = 0; m < matches; ++m) {
    MatchRecord match;
    match.match_id = std::string(match_prefix) + PaddedId('M', m + 1, 4).substr(1);
    const Day day = first_day + static_cast<Day>(static_cast<long long>(m) * days / std::max(matches, 1));
    match.start_time = DayStart(day) + kStartHours[m % 3] * 3600 + 1800;
    std::vector<std::size_t> chosen;
    chosen.push_back(mega[rng.Below(mega.size())]);
    for (std::size_t idx : rng.SampleWithoutReplacement(regular.size(),
                                                        static_cast<std::size_t>(templates_per_match - 1))) {
      chosen.push_back(regular[idx]);
    }
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t t : chosen) {
      ContestSpec c = templates[t];
      c.match_id = match.match_id;
      c.contest_id = match.match_id + "-" + c.template_id + "-1";
      match.contest_ids.push_back(c.contest_id);
      schedule.contests.push_back(std::move(c));
    }
    schedule.matches.push_back(std::move(match));
  }
  return schedule;
}

std::vector<PlayerProfile> GenerateArchetypes(const GeneratorConfig& config, std::uint64_t seed) {
  Rng rng(DeriveSeed(seed, {3}));
  struct Centre {
    double log_fee;
    double size_pref;
    double risk;
  };
  std::vector<Centre> centres;
  for (int s = 0; s < config.archetype_segments; ++s) {
    const double fee = static_cast<double>(kFeeGridUnits[WeightedIndex(kFeeGridWeights, rng)]);
    centres.push_back({std::log(fee), rng.Uniform(), rng.Uniform()});
  }
  std::vector<PlayerProfile> players;
  players.reserve(static_cast<std::size_t>(config.players));
  const double jitter = config.archetype_jitter;
  for (int i = 0; i < config.players; ++i) {
    const Centre& c = centres[rng.Below(centres.size())];
    PlayerProfile p;
    p.player_id = PaddedId('P', i + 1, 6);
    PlayerArchetype& a = p.archetype;
    a.preferred_log_entry_fee = c.log_fee + 2.0 * jitter * rng.Normal();
    a.fee_sensitivity = config.fee_sensitivity_mean * rng.Uniform(0.5, 1.5);
    a.size_preference = std::clamp(c.size_pref + jitter * rng.Normal(), 0.0, 1.0);
    a.risk_appetite = std::clamp(c.risk + jitter * rng.Normal(), 0.0, 1.0);
    a.popularity_weight = config.popularity_weight_mean * rng.Uniform(0.0, 2.0);
    a.activity_rate = std::min(20.0, config.activity_rate_mean * rng.Uniform(0.5, 1.5));
    a.multi_entry_propensity =
        std::clamp(config.multi_entry_propensity_mean * rng.Uniform(0.0, 2.0), 0.0, 1.0);
    players.push_back(std::move(p));
  }
  return players;
}

std::vector<JoinRecord> AssignInstances(std::vector<PendingJoin> pending, MatchRecord& match,
                                        std::vector<ContestSpec>& contests) {
  std::sort(pending.begin(), pending.end(), [](const PendingJoin& a, const PendingJoin& b) {
    return std::tie(a.joining_time, a.player_id, a.template_id) <
           std::tie(b.joining_time, b.player_id, b.template_id);
  });
  struct Live {
    std::size_t contest_index;
    int fill;
    int instance;
  };
  std::map<std::string, Live> live;
  for (std::size_t i = 0; i < contests.size(); ++i) {
    if (contests[i].match_id != match.match_id) continue;
    const auto [it, inserted] = live.emplace(contests[i].template_id, Live{i, 0, 1});
    if (!inserted) {
      // Keep the newest instance when a match already has several.
      it->second = Live{i, 0, it->second.instance + 1};
    }
  }
  std::vector<JoinRecord> joins;
  joins.reserve(pending.size());
  for (PendingJoin& p : pending) {
    const auto it = live.find(p.template_id);
    if (it == live.end()) {
      throw std::invalid_argument("template " + p.template_id + " is not live in " + match.match_id);
    }
    Live& slot = it->second;
    const ContestSpec& spec = contests[slot.contest_index];
    JoinRecord j;
    j.player_id = std::move(p.player_id);
    j.contest_id = spec.contest_id;
    j.match_id = match.match_id;
    j.joining_time = p.joining_time;
    j.entry_fee_paid = spec.entry_fee;
    j.prize_won = p.prize_won;
    joins.push_back(std::move(j));
    if (++slot.fill >= spec.contest_size) {
      ContestSpec next = spec;
      ++slot.instance;
      next.contest_id = match.match_id + "-" + next.template_id + "-" + std::to_string(slot.instance);
      match.contest_ids.push_back(next.contest_id);
      contests.push_back(std::move(next));
      slot.contest_index = contests.size() - 1;
      slot.fill = 0;
    }
  }
  return joins;
}

Money SamplePrize(const ContestSpec& spec, Rng& rng) {
  const int rank = 1 + static_cast<int>(rng.Below(static_cast<std::uint64_t>(spec.contest_size)));
  return spec.prize_distribution.PrizeForRank(rank);
}

Dataset GenerateSynthetic(const GeneratorConfig& config, std::uint64_t seed) {
  config.Validate();
  return GenerateSynthetic(config, GenerateArchetypes(config, seed), seed);
}

Dataset GenerateSynthetic(const GeneratorConfig& config, std::vector<PlayerProfile> players,
                          std::uint64_t seed) {
  config.Validate();
  Rng catalog_rng(DeriveSeed(seed, {1}));
  const std::vector<ContestSpec> templates =
      GenerateTemplateCatalog(config.template_catalog_size, catalog_rng);
  Rng schedule_rng(DeriveSeed(seed, {2}));
  // Two lead-in days keep every join (up to 36h before start) inside the range.
  Schedule schedule = GenerateSchedule(templates, config.matches, config.templates_per_match,
                                       config.start_day + 2, config.days - 2, "M", schedule_rng);

  Dataset data;
  data.contests = std::move(schedule.contests);
  for (MatchRecord& match : schedule.matches) {
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < data.contests.size(); ++i) {
      if (data.contests[i].match_id == match.match_id) live.push_back(i);
    }
    std::vector<ChoiceFeatures> features;
    features.reserve(live.size());
    for (std::size_t i : live) features.push_back(MakeChoiceFeatures(data.contests[i]));

    std::vector<PendingJoin> pending;
    for (const PlayerProfile& p : players) {
      Rng rng(DeriveSeed(seed, {4, HashString(match.match_id), HashString(p.player_id)}));
      if (!rng.Bernoulli(config.match_participation)) continue;
      for (std::size_t pick : SampleJoinChoices(p.archetype, features, {},
                                                config.max_joins_per_match, rng)) {
        const ContestSpec& spec = data.contests[live[pick]];
        PendingJoin j;
        j.player_id = p.player_id;
        j.template_id = spec.template_id;
        j.joining_time = match.start_time - 300 - static_cast<Timestamp>(rng.Below(kJoinLeadSeconds - 300));
        j.prize_won = SamplePrize(spec, rng);
        pending.push_back(std::move(j));
      }
    }
    std::vector<JoinRecord> joins = AssignInstances(std::move(pending), match, data.contests);
    for (JoinRecord& j : joins) data.joins.push_back(std::move(j));
  }
  std::sort(data.joins.begin(), data.joins.end(), [](const JoinRecord& a, const JoinRecord& b) {
    return std::tie(a.joining_time, a.player_id, a.contest_id) <
           std::tie(b.joining_time, b.player_id, b.contest_id);
  });
  data.matches = std::move(schedule.matches);
  data.players = std::move(players);
  return data;
}

TimeSplit SplitByTime(std::span<const JoinRecord> joins, Timestamp train_end, Timestamp valid_end,
                      Timestamp range_begin, Timestamp range_end) {
  if (!(range_begin <= train_end && train_end < valid_end && valid_end <= range_end)) {
    throw std::invalid_argument("split boundaries must satisfy begin <= train_end < valid_end <= end");
  }
  TimeSplit split;
  for (const JoinRecord& j : joins) {
    if (j.joining_time <= train_end) {
      split.train.push_back(j);
    } else if (j.joining_time <= valid_end) {
      split.valid.push_back(j);
    } else {
      split.test.push_back(j);
    }
  }
  return split;
}

}  // namespace widir
