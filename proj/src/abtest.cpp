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

#include "widir/abtest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "widir/generator.hpp"
#include "widir/random.hpp"

namespace widir {
namespace {

constexpr std::uint64_t kCohortTag = 0xc0;
constexpr std::uint64_t kSimTag = 0x51;

// A cohort is a thin slice of every contest's field, so an entry is charged
// its share of the payout, not a sampled rank. A sampled top prize in a Mega
// contest dwarfs a cohort's whole entry volume and flips the sign of GGR.
Money ExpectedPrize(const ContestSpec& spec) {
  return Money::FromCents(spec.prize_distribution.TotalPayout().cents() / spec.contest_size);
}

}  // namespace

std::size_t CohortAssignment::TotalAssigned() const {
  std::size_t n = 0;
  for (const auto& m : members) n += m.size();
  return n;
}

CohortAssignment AssignCohorts(std::span<const std::string> players,
                               std::span<const double> activity,
                               std::span<const std::size_t> group_sizes, std::uint64_t seed) {
  if (players.size() != activity.size()) {
    throw std::invalid_argument("players and activity differ in length");
  }
  if (group_sizes.empty()) throw std::invalid_argument("no groups");
  const std::size_t n = players.size();
  const std::size_t requested = std::accumulate(group_sizes.begin(), group_sizes.end(), std::size_t{0});
  if (requested > n) {
    throw std::invalid_argument("group sizes (" + std::to_string(requested) +
                                ") exceed the population (" + std::to_string(n) + ")");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (activity[a] != activity[b]) return activity[a] < activity[b];
    return players[a] < players[b];
  });
  Rng rng(DeriveSeed(seed, {kCohortTag}));
  for (int d = 0; d < 10; ++d) {
    const std::size_t lo = n * static_cast<std::size_t>(d) / 10;
    const std::size_t hi = n * static_cast<std::size_t>(d + 1) / 10;
    rng.Shuffle(std::span<std::size_t>(order.data() + lo, hi - lo));
  }

  CohortAssignment out;
  out.seed = seed;
  out.group_names.push_back("CG");
  for (std::size_t g = 1; g < group_sizes.size(); ++g) out.group_names.push_back("TG" + std::to_string(g));
  out.members.resize(group_sizes.size());

  // Deal along the stratified order, always to the slot (groups plus the
  // unassigned remainder) furthest below its proportional quota, so every
  // prefix of the order, and hence every stratum, is split within one player
  // of proportion.
  std::vector<std::size_t> sizes(group_sizes.begin(), group_sizes.end());
  sizes.push_back(n - requested);
  std::vector<std::size_t> dealt(sizes.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t pick = 0;
    double best = -1e300;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      if (dealt[k] == sizes[k]) continue;
      const double deficit = static_cast<double>(sizes[k]) * static_cast<double>(i + 1) /
                                 static_cast<double>(n) -
                             static_cast<double>(dealt[k]);
      if (deficit > best) {
        best = deficit;
        pick = k;
      }
    }
    ++dealt[pick];
    if (pick < group_sizes.size()) out.members[pick].push_back(players[order[i]]);
  }
  for (auto& m : out.members) std::sort(m.begin(), m.end());
  return out;
}

std::string_view PeriodName(Period period) { return period == Period::kPre ? "pre" : "post"; }

SimulationOutput SimulatePeriod(const CohortAssignment& assignment,
                                const std::map<std::string, Scorer>& policies,
                                std::span<const MatchRecord> matches, const ContestCatalog& catalog,
                                const std::unordered_map<std::string, PlayerArchetype>& players,
                                const BehaviorModel& behavior, Period period, std::uint64_t seed) {
  if (!(behavior.boost > 0.0)) throw std::invalid_argument("boost must be positive");
  for (std::size_t g = 1; g < assignment.group_names.size(); ++g) {
    if (period == Period::kPost && !policies.contains(assignment.group_names[g])) {
      throw std::invalid_argument("no policy for treated group " + assignment.group_names[g]);
    }
  }
  SimulationOutput out;
  for (const std::string& name : assignment.group_names) {
    out.aggregates.push_back(MetricAggregate{name, period, 0, Money(), Money()});
  }
  const double log_boost = std::log(behavior.boost);

  for (const MatchRecord& match : matches) {
    const std::vector<std::string>& tids = catalog.MatchTemplates(match.match_id);
    if (tids.empty()) continue;
    std::vector<const ContestSpec*> specs;
    std::vector<ChoiceFeatures> features;
    for (const std::string& tid : tids) {
      specs.push_back(&catalog.Template(tid));
      features.push_back(MakeChoiceFeatures(*specs.back()));
    }
    const Day day = FeatureDayForMatch(match.start_time);
    for (std::size_t g = 0; g < assignment.members.size(); ++g) {
      const Scorer* policy = nullptr;
      if (g > 0 && period == Period::kPost) policy = &policies.at(assignment.group_names[g]);
      MetricAggregate& agg = out.aggregates[g];
      for (const std::string& pid : assignment.members[g]) {
        const auto arch = players.find(pid);
        if (arch == players.end()) throw std::invalid_argument("no archetype for player " + pid);
        Rng rng(DeriveSeed(seed, {kSimTag, static_cast<std::uint64_t>(period),
                                  HashString(match.match_id), HashString(pid)}));
        if (!rng.Bernoulli(behavior.match_participation)) continue;
        std::vector<double> boost;
        if (policy != nullptr) {
          const std::vector<double> scores = (*policy)(ScoringQuery{pid, match.match_id, day, specs});
          const RankedSlate slate = MakeSlate(pid, match.match_id, tids, scores);
          boost.assign(tids.size(), 0.0);
          const std::size_t top =
              std::min(slate.ranked.size(), static_cast<std::size_t>(behavior.exposed_h));
          for (std::size_t r = 0; r < top; ++r) {
            const auto it = std::lower_bound(tids.begin(), tids.end(), slate.ranked[r].first);
            boost[static_cast<std::size_t>(it - tids.begin())] = log_boost;
          }
        }
        for (std::size_t pick :
             SampleJoinChoices(arch->second, features, boost, behavior.max_joins_per_match,
                               behavior.outside_share, rng)) {
          const ContestSpec& spec = *specs[pick];
          JoinRecord j;
          j.player_id = pid;
          j.contest_id = spec.contest_id;
          j.match_id = match.match_id;
          j.joining_time = match.start_time - 300 - static_cast<Timestamp>(rng.Below(kJoinLeadSeconds - 300));
          j.entry_fee_paid = spec.entry_fee;
          j.prize_won = ExpectedPrize(spec);
          ++agg.contest_joins;
          agg.entry_amount += j.entry_fee_paid;
          agg.prizes_paid += j.prize_won;
          out.joins.push_back(std::move(j));
        }
      }
    }
  }
  return out;
}

double Delta(double tg_pre, double cg_pre, double tg_post, double cg_post) {
  if (!(cg_pre > 0.0) || !(cg_post > 0.0)) {
    throw std::invalid_argument("control aggregates must be positive");
  }
  return (tg_post - cg_post) / cg_post - (tg_pre - cg_pre) / cg_pre;
}

std::string_view MetricName(BusinessMetric metric) {
  switch (metric) {
    case BusinessMetric::kContestJoins:
      return "CJ";
    case BusinessMetric::kEntryAmount:
      return "CEA";
    case BusinessMetric::kGrossGamingRevenue:
      return "GGR";
  }
  return "?";
}

double MetricValue(const MetricAggregate& aggregate, BusinessMetric metric) {
  switch (metric) {
    case BusinessMetric::kContestJoins:
      return static_cast<double>(aggregate.contest_joins);
    case BusinessMetric::kEntryAmount:
      return static_cast<double>(aggregate.entry_amount.cents());
    case BusinessMetric::kGrossGamingRevenue:
      return static_cast<double>(aggregate.ggr().cents());
  }
  return 0.0;
}

AbReport MakeAbReport(std::vector<MetricAggregate> pre, std::vector<MetricAggregate> post) {
  AbReport report{std::move(pre), std::move(post), {}};
  auto find = [](const std::vector<MetricAggregate>& v, const std::string& group) {
    for (const MetricAggregate& a : v)
      if (a.group == group) return &a;
    throw std::invalid_argument("group " + group + " missing from a period");
  };
  const MetricAggregate* cg_pre = find(report.pre, "CG");
  const MetricAggregate* cg_post = find(report.post, "CG");
  for (const MetricAggregate& tg : report.pre) {
    if (tg.group == "CG") continue;
    const MetricAggregate* tg_post = find(report.post, tg.group);
    for (BusinessMetric m : {BusinessMetric::kContestJoins, BusinessMetric::kEntryAmount,
                             BusinessMetric::kGrossGamingRevenue}) {
      report.deltas.emplace_back(tg.group, m,
                                 Delta(MetricValue(tg, m), MetricValue(*cg_pre, m),
                                       MetricValue(*tg_post, m), MetricValue(*cg_post, m)));
    }
  }
  return report;
}

std::string AbReport::Serialize() const {
  std::string out;
  for (const auto* period : {&pre, &post}) {
    for (const MetricAggregate& a : *period) {
      const std::string prefix = std::string(PeriodName(a.period)) + "." + a.group + ".";
      out += prefix + "CJ = " + std::to_string(a.contest_joins) + "\n";
      out += prefix + "CEA = " + a.entry_amount.ToString() + "\n";
      out += prefix + "prizes = " + a.prizes_paid.ToString() + "\n";
      out += prefix + "GGR = " + a.ggr().ToString() + "\n";
    }
  }
  char buf[64];
  for (const auto& [group, metric, value] : deltas) {
    std::snprintf(buf, sizeof buf, "%.17g", value);
    out += "delta." + group + "." + std::string(MetricName(metric)) + " = " + buf + "\n";
  }
  return out;
}

Scorer GroundTruthScorer(const std::unordered_map<std::string, PlayerArchetype>& players) {
  return [&players](const ScoringQuery& q) {
    std::vector<double> scores(q.templates.size(), 0.0);
    const auto it = players.find(std::string(q.player_id));
    if (it == players.end()) return scores;
    for (std::size_t i = 0; i < q.templates.size(); ++i) {
      scores[i] = ChoiceUtility(it->second, MakeChoiceFeatures(*q.templates[i]));
    }
    return scores;
  };
}

}  // namespace widir
