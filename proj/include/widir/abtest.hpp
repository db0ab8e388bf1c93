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
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "widir/domain.hpp"
#include "widir/evaluator.hpp"

namespace widir {

// Group 0 is the control group "CG"; the rest are "TG1", "TG2", ...
struct CohortAssignment {
  std::vector<std::string> group_names;
  std::vector<std::vector<std::string>> members;
  std::uint64_t seed = 0;

  std::size_t TotalAssigned() const;
};

// Stratified by activity decile: players are sorted by activity, cut into ten
// equal strata, shuffled within each stratum, then dealt to groups by largest
// remainder so every stratum is split in proportion to the group sizes.
CohortAssignment AssignCohorts(std::span<const std::string> players,
                               std::span<const double> activity,
                               std::span<const std::size_t> group_sizes, std::uint64_t seed);

enum class Period { kPre, kPost };
std::string_view PeriodName(Period period);

struct MetricAggregate {
  std::string group;
  Period period = Period::kPre;
  long long contest_joins = 0;
  Money entry_amount;
  Money prizes_paid;

  Money ggr() const { return entry_amount - prizes_paid; }
};

struct BehaviorModel {
  // Multiplicative attention weight on the top `exposed_h` recommendations.
  double boost = 2.0;
  int exposed_h = 5;
  double match_participation = 0.08;
  int max_joins_per_match = 40;
  // Untreated probability that a visit attempt ends without a join.
  double outside_share = 0.5;
};

struct SimulationOutput {
  // One per group, in group order.
  std::vector<MetricAggregate> aggregates;
  std::vector<JoinRecord> joins;
};

// Untreated in the pre period. In the post period each treated group with a
// policy gets its top-h templates boosted before the choice draw.
SimulationOutput SimulatePeriod(const CohortAssignment& assignment,
                                const std::map<std::string, Scorer>& policies,
                                std::span<const MatchRecord> matches, const ContestCatalog& catalog,
                                const std::unordered_map<std::string, PlayerArchetype>& players,
                                const BehaviorModel& behavior, Period period, std::uint64_t seed);

// (TG_post - CG_post)/CG_post - (TG_pre - CG_pre)/CG_pre. Throws
// std::invalid_argument unless both control values are positive.
double Delta(double tg_pre, double cg_pre, double tg_post, double cg_post);

enum class BusinessMetric { kContestJoins, kEntryAmount, kGrossGamingRevenue };
std::string_view MetricName(BusinessMetric metric);
double MetricValue(const MetricAggregate& aggregate, BusinessMetric metric);

struct AbReport {
  std::vector<MetricAggregate> pre;
  std::vector<MetricAggregate> post;
  // (group, metric) -> delta
  std::vector<std::tuple<std::string, BusinessMetric, double>> deltas;

  std::string Serialize() const;
};

AbReport MakeAbReport(std::vector<MetricAggregate> pre, std::vector<MetricAggregate> post);

// Utility-ordered policy built from the ground-truth archetypes.
Scorer GroundTruthScorer(const std::unordered_map<std::string, PlayerArchetype>& players);

}  // namespace widir
