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
#include <span>
#include <string>
#include <vector>

#include "widir/domain.hpp"
#include "widir/kv_config.hpp"
#include "widir/random.hpp"

namespace widir {

struct GeneratorConfig {
  int players = 5000;
  int matches = 200;
  int templates_per_match = 60;
  int template_catalog_size = 150;
  Day start_day = DaysFromCivil(2024, 1, 1);
  int days = 120;
  // Probability that a player is active in a given match.
  double match_participation = 0.08;
  int max_joins_per_match = 40;

  // Archetype mixture: players belong to one of `archetype_segments` segments
  // whose centres are drawn from the seed; individuals jitter around them.
  int archetype_segments = 6;
  double activity_rate_mean = 2.5;
  double fee_sensitivity_mean = 2.0;
  double popularity_weight_mean = 0.15;
  double multi_entry_propensity_mean = 0.2;
  double archetype_jitter = 0.25;

  static GeneratorConfig FromKeyValue(const KeyValueConfig& kv);
  KeyValueConfig ToKeyValue() const;
  // Throws ConfigError on an unusable configuration.
  void Validate() const;
};

// Everything the choice model needs to know about one live template.
struct ChoiceFeatures {
  double log_entry_fee = 0.0;
  double size_score = 0.0;
  double top_prize_fraction = 0.0;
  double log_contest_size = 0.0;
  bool multi_entry = false;
};

ChoiceFeatures MakeChoiceFeatures(const ContestSpec& spec);

// Deterministic part of the utility:
//   -a*|log(fee) - pref| + size_pref*size_score + risk*top_prize + g*log(size)
double ChoiceUtility(const PlayerArchetype& player, const ChoiceFeatures& contest);

// Sampled template indices for one (player, match) visit. `log_boost` is added
// to the utility of each template before the Gumbel-max draw (0 for untreated).
std::vector<std::size_t> SampleJoinChoices(const PlayerArchetype& player,
                                           std::span<const ChoiceFeatures> contests,
                                           std::span<const double> log_boost, int max_joins,
                                           Rng& rng);
// Variant with an outside "no join" option: attempts ~ Poisson(activity /
// (1 - outside_share)) and each attempt competes against an outside utility
// that wins with probability `outside_share` when nothing is boosted, so
// boosting the choice set raises the join count.
std::vector<std::size_t> SampleJoinChoices(const PlayerArchetype& player,
                                           std::span<const ChoiceFeatures> contests,
                                           std::span<const double> log_boost, int max_joins,
                                           double outside_share, Rng& rng);

// Contest templates (one representative ContestSpec each, contest_id/match_id
// left empty). The first `mega_templates` entries are Mega.
std::vector<ContestSpec> GenerateTemplateCatalog(int count, Rng& rng);

struct Schedule {
  std::vector<MatchRecord> matches;
  // One initial instance per template per match.
  std::vector<ContestSpec> contests;
};

// Matches uniformly spread over [first_day, first_day + days), each with one
// Mega template plus (templates_per_match - 1) others.
Schedule GenerateSchedule(std::span<const ContestSpec> templates, int matches,
                          int templates_per_match, Day first_day, int days,
                          std::string_view match_prefix, Rng& rng);

std::vector<PlayerProfile> GenerateArchetypes(const GeneratorConfig& config, std::uint64_t seed);

// A join decided by the choice model before instances are assigned.
struct PendingJoin {
  std::string player_id;
  std::string template_id;
  Timestamp joining_time = 0;
  Money prize_won;
};

// Assigns pending joins (any order) of one match to contest instances in
// joining-time order, regenerating a fresh instance of the same template each
// time one fills. Appends new instances to `contests` and the match record.
std::vector<JoinRecord> AssignInstances(std::vector<PendingJoin> pending, MatchRecord& match,
                                        std::vector<ContestSpec>& contests);

// Draws the prize of one entry: a uniformly random finishing rank.
Money SamplePrize(const ContestSpec& spec, Rng& rng);

Dataset GenerateSynthetic(const GeneratorConfig& config, std::uint64_t seed);
// Same, with a caller-supplied archetype table.
Dataset GenerateSynthetic(const GeneratorConfig& config, std::vector<PlayerProfile> players,
                          std::uint64_t seed);

struct TimeSplit {
  std::vector<JoinRecord> train;
  std::vector<JoinRecord> valid;
  std::vector<JoinRecord> test;
};

// t <= train_end -> train, t <= valid_end -> valid, else test. Boundaries must
// satisfy range_begin <= train_end < valid_end <= range_end.
TimeSplit SplitByTime(std::span<const JoinRecord> joins, Timestamp train_end, Timestamp valid_end,
                      Timestamp range_begin, Timestamp range_end);

}  // namespace widir
