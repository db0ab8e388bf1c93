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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "fixtures.hpp"
#include "widir/abtest.hpp"
#include "widir/generator.hpp"
#include "widir/random.hpp"

namespace widir {
namespace {

TEST(DeltaTest, Examples) {
  EXPECT_DOUBLE_EQ(Delta(100, 100, 110, 100), 0.10);
  EXPECT_EQ(Delta(100, 100, 100, 100), 0.0);
  EXPECT_EQ(Delta(120, 100, 120, 100), 0.0);
  EXPECT_THROW(Delta(1, 0, 1, 1), std::invalid_argument);
  EXPECT_THROW(Delta(1, 1, 1, 0), std::invalid_argument);
  EXPECT_THROW(Delta(1, -1, 1, 1), std::invalid_argument);
}

TEST(DeltaTest, ZeroForEqualRatiosAndScaleInvariant) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double cg_pre = 1 + rng.Uniform() * 100, cg_post = 1 + rng.Uniform() * 100;
    const double ratio = 0.5 + rng.Uniform();
    // Dyadic-free values so compare with a tolerance scaled to the ratio.
    EXPECT_NEAR(Delta(ratio * cg_pre, cg_pre, ratio * cg_post, cg_post), 0.0, 1e-14);
    const double tg_pre = rng.Uniform() * 100, tg_post = rng.Uniform() * 100;
    const double k = std::exp2(static_cast<double>(rng.Below(20)) - 10.0);
    EXPECT_EQ(Delta(k * tg_pre, k * cg_pre, k * tg_post, k * cg_post),
              Delta(tg_pre, cg_pre, tg_post, cg_post));
    const double c = 0.1 + rng.Uniform() * 10;
    EXPECT_NEAR(Delta(c * tg_pre, c * cg_pre, c * tg_post, c * cg_post),
                Delta(tg_pre, cg_pre, tg_post, cg_post), 1e-12);
  }
}

struct Population {
  std::vector<std::string> ids;
  std::vector<double> activity;
};

Population MakePopulation(int n) {
  Population p;
  Rng rng(2);
  for (int i = 0; i < n; ++i) {
    p.ids.push_back("p" + std::to_string(i));
    p.activity.push_back(std::floor(rng.Uniform() * 50));  // ties across strata
  }
  return p;
}

TEST(CohortTest, DisjointExhaustiveBalanced) {
  const Population pop = MakePopulation(10000);
  const std::vector<std::size_t> sizes = {2500, 2500, 2500, 2500};
  const CohortAssignment a = AssignCohorts(pop.ids, pop.activity, sizes, 9);
  EXPECT_EQ(a.group_names, (std::vector<std::string>{"CG", "TG1", "TG2", "TG3"}));
  EXPECT_EQ(a.TotalAssigned(), 10000u);
  std::set<std::string> all;
  for (std::size_t g = 0; g < 4; ++g) {
    EXPECT_EQ(a.members[g].size(), sizes[g]);
    all.insert(a.members[g].begin(), a.members[g].end());
  }
  EXPECT_EQ(all.size(), 10000u);

  // Decile by the same (activity, id) order, recomputed here.
  std::vector<std::size_t> order(pop.ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return pop.activity[x] != pop.activity[y] ? pop.activity[x] < pop.activity[y] : pop.ids[x] < pop.ids[y];
  });
  std::map<std::string, int> decile;
  for (std::size_t i = 0; i < order.size(); ++i) decile[pop.ids[order[i]]] = static_cast<int>(10 * i / order.size());
  for (std::size_t g = 0; g < 4; ++g) {
    std::array<int, 10> counts{};
    for (const auto& id : a.members[g]) ++counts[static_cast<std::size_t>(decile.at(id))];
    for (int c : counts) EXPECT_NEAR(c / 2500.0, 0.1, 0.01);
  }
}

TEST(CohortTest, PartialAssignmentAndDeterminism) {
  const Population pop = MakePopulation(1000);
  const std::vector<std::size_t> sizes = {100, 300};
  const CohortAssignment a = AssignCohorts(pop.ids, pop.activity, sizes, 1);
  EXPECT_EQ(a.members[0].size(), 100u);
  EXPECT_EQ(a.members[1].size(), 300u);
  const CohortAssignment b = AssignCohorts(pop.ids, pop.activity, sizes, 1);
  EXPECT_EQ(a.members, b.members);
  EXPECT_NE(AssignCohorts(pop.ids, pop.activity, sizes, 2).members, a.members);
  const std::vector<std::size_t> over = {600, 401};
  EXPECT_THROW(AssignCohorts(pop.ids, pop.activity, over, 1), std::invalid_argument);
  EXPECT_THROW(AssignCohorts(pop.ids, std::span(pop.activity).first(3), sizes, 1), std::invalid_argument);
}

struct SimWorld {
  Dataset data;
  std::unordered_map<std::string, PlayerArchetype> archetypes;
  CohortAssignment cohorts;
};

SimWorld MakeSimWorld(int players, std::uint64_t seed) {
  SimWorld w;
  GeneratorConfig g = testing::SmallWorld();
  g.players = players;
  g.templates_per_match = 30;
  g.template_catalog_size = 60;
  w.data = GenerateSynthetic(g, seed);
  std::vector<std::string> ids;
  std::vector<double> activity;
  for (const PlayerProfile& p : w.data.players) {
    w.archetypes.emplace(p.player_id, p.archetype);
    ids.push_back(p.player_id);
    activity.push_back(p.archetype.activity_rate);
  }
  const std::vector<std::size_t> sizes = {ids.size() / 2, ids.size() / 2};
  w.cohorts = AssignCohorts(ids, activity, sizes, seed);
  return w;
}

TEST(SimulateTest, EmptyScheduleGivesZeros) {
  const SimWorld w = MakeSimWorld(100, 1);
  const ContestCatalog catalog(w.data.contests);
  const auto out = SimulatePeriod(w.cohorts, {{"TG1", PopularityScorer()}}, {}, catalog, w.archetypes,
                                  BehaviorModel{}, Period::kPost, 1);
  ASSERT_EQ(out.aggregates.size(), 2u);
  for (const auto& a : out.aggregates) {
    EXPECT_EQ(a.contest_joins, 0);
    EXPECT_EQ(a.entry_amount, Money());
    EXPECT_EQ(a.ggr(), Money());
  }
  EXPECT_TRUE(out.joins.empty());
}

TEST(SimulateTest, MissingPolicyRejectedInPostOnly) {
  const SimWorld w = MakeSimWorld(100, 1);
  const ContestCatalog catalog(w.data.contests);
  EXPECT_THROW(SimulatePeriod(w.cohorts, {}, w.data.matches, catalog, w.archetypes, BehaviorModel{},
                              Period::kPost, 1),
               std::invalid_argument);
  EXPECT_NO_THROW(SimulatePeriod(w.cohorts, {}, w.data.matches, catalog, w.archetypes, BehaviorModel{},
                                 Period::kPre, 1));
}

TEST(SimulateTest, ConservationByIndependentSummation) {
  const SimWorld w = MakeSimWorld(400, 3);
  const ContestCatalog catalog(w.data.contests);
  const Scorer truth = GroundTruthScorer(w.archetypes);
  const auto out = SimulatePeriod(w.cohorts, {{"TG1", truth}}, w.data.matches, catalog, w.archetypes,
                                  BehaviorModel{}, Period::kPost, 4);
  std::map<std::string, std::size_t> group_of;
  for (std::size_t g = 0; g < w.cohorts.members.size(); ++g)
    for (const auto& p : w.cohorts.members[g]) group_of[p] = g;
  std::vector<long long> cj(2, 0);
  std::vector<long long> entry(2, 0), prizes(2, 0);
  for (const JoinRecord& j : out.joins) {
    const std::size_t g = group_of.at(j.player_id);
    ++cj[g];
    entry[g] += j.entry_fee_paid.cents();
    prizes[g] += j.prize_won.cents();
    const ContestSpec& spec = *catalog.Find(j.contest_id);
    EXPECT_EQ(j.entry_fee_paid, spec.entry_fee);
    // Charged the per-seat share of the whole payout table.
    long long payout = 0;
    for (const PrizeTier& t : spec.prize_distribution.tiers)
      payout += static_cast<long long>(t.rank_to - t.rank_from + 1) * t.prize_per_rank.cents();
    EXPECT_EQ(j.prize_won.cents(), payout / spec.contest_size);
  }
  ASSERT_GT(out.joins.size(), 100u);
  for (std::size_t g = 0; g < 2; ++g) {
    const MetricAggregate& a = out.aggregates[g];
    EXPECT_EQ(a.contest_joins, cj[g]);
    EXPECT_EQ(a.entry_amount.cents(), entry[g]);
    EXPECT_EQ(a.prizes_paid.cents(), prizes[g]);
    EXPECT_EQ(a.ggr().cents(), entry[g] - prizes[g]);
    EXPECT_LE(a.ggr(), a.entry_amount);
  }
  // Same seed, same output.
  const auto again = SimulatePeriod(w.cohorts, {{"TG1", truth}}, w.data.matches, catalog, w.archetypes,
                                    BehaviorModel{}, Period::kPost, 4);
  EXPECT_EQ(again.joins, out.joins);
}

TEST(SimulateTest, GroundTruthPolicyWithBoostRaisesJoins) {
  const SimWorld w = MakeSimWorld(600, 5);
  const ContestCatalog catalog(w.data.contests);
  const Scorer truth = GroundTruthScorer(w.archetypes);
  BehaviorModel b;
  b.boost = 2.0;
  b.match_participation = 0.3;
  const auto out = SimulatePeriod(w.cohorts, {{"TG1", truth}}, w.data.matches, catalog, w.archetypes, b,
                                  Period::kPost, 6);
  EXPECT_GT(out.aggregates[1].contest_joins, out.aggregates[0].contest_joins);
}

TEST(SimulateTest, NullBoostIsIndistinguishable) {
  const SimWorld w = MakeSimWorld(300, 7);
  const ContestCatalog catalog(w.data.contests);
  const Scorer truth = GroundTruthScorer(w.archetypes);
  BehaviorModel b;
  b.boost = 1.0;
  b.match_participation = 0.3;
  std::vector<double> diffs;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto out = SimulatePeriod(w.cohorts, {{"TG1", truth}}, w.data.matches, catalog, w.archetypes,
                                    b, Period::kPost, 100 + seed);
    // Relative to the pre period of the same cohorts so group composition cancels.
    const auto pre = SimulatePeriod(w.cohorts, {}, w.data.matches, catalog, w.archetypes, b,
                                    Period::kPre, 100 + seed);
    diffs.push_back(Delta(static_cast<double>(pre.aggregates[1].contest_joins),
                          static_cast<double>(pre.aggregates[0].contest_joins),
                          static_cast<double>(out.aggregates[1].contest_joins),
                          static_cast<double>(out.aggregates[0].contest_joins)));
  }
  const double mean = std::accumulate(diffs.begin(), diffs.end(), 0.0) / 20.0;
  double var = 0.0;
  for (double d : diffs) var += (d - mean) * (d - mean);
  const double sd = std::sqrt(var / 19.0);
  EXPECT_GT(sd, 0.0);
  EXPECT_LT(std::abs(mean), 3.0 * sd / std::sqrt(20.0));
}

TEST(ReportTest, DeltasAndSerialization) {
  std::vector<MetricAggregate> pre = {{"CG", Period::kPre, 100, Money::FromUnits(1000), Money::FromUnits(900)},
                                      {"TG1", Period::kPre, 100, Money::FromUnits(1000), Money::FromUnits(900)}};
  std::vector<MetricAggregate> post = {{"CG", Period::kPost, 100, Money::FromUnits(1000), Money::FromUnits(900)},
                                       {"TG1", Period::kPost, 110, Money::FromUnits(1200), Money::FromUnits(1000)}};
  const AbReport r = MakeAbReport(pre, post);
  ASSERT_EQ(r.deltas.size(), 3u);
  EXPECT_DOUBLE_EQ(std::get<2>(r.deltas[0]), 0.10);
  EXPECT_DOUBLE_EQ(std::get<2>(r.deltas[1]), 0.20);
  EXPECT_DOUBLE_EQ(std::get<2>(r.deltas[2]), 1.0);
  const std::string s = r.Serialize();
  EXPECT_NE(s.find("post.TG1.GGR = 200.00\n"), std::string::npos);
  EXPECT_NE(s.find("delta.TG1.CEA = 0.2"), std::string::npos);
  post.pop_back();
  EXPECT_THROW(MakeAbReport(pre, post), std::invalid_argument);
}

}  // namespace
}  // namespace widir
