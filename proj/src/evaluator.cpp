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

#include "widir/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "widir/error.hpp"

namespace widir {
namespace {

std::vector<double> ScoreWithModel(const WidirParams& params, const NormalizationStats& stats,
                                   const FeatureSnapshot& snapshot, std::string_view player_id,
                                   Day day, std::span<const ContestSpec* const> templates) {
  static const std::vector<RecentJoin> kNoRecent;
  const PlayerRow* row = snapshot.Find(player_id);
  const std::vector<float> player =
      row != nullptr ? row->features : ColdStartPlayerFeatures(day, stats);
  const std::vector<RecentJoin>& recent = row != nullptr ? row->recent : kNoRecent;
  std::vector<float> contests;
  std::vector<float> interactions;
  for (const ContestSpec* spec : templates) {
    const std::vector<float> c = ContestFeatures(*spec, stats);
    contests.insert(contests.end(), c.begin(), c.end());
    const std::vector<float> i = InteractionFeatures(recent, *spec, day, stats);
    interactions.insert(interactions.end(), i.begin(), i.end());
  }
  const std::vector<float> scores =
      ScoreBatch(params, ScoringInput{player, contests, interactions, templates.size()});
  return {scores.begin(), scores.end()};
}

std::size_t HitsAt(const RankedSlate& slate, const std::set<std::string>& joined, int h) {
  if (h < 1) throw std::invalid_argument("cutoff h must be >= 1");
  const std::size_t top = std::min(slate.ranked.size(), static_cast<std::size_t>(h));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < top; ++i) hits += joined.contains(slate.ranked[i].first) ? 1 : 0;
  return hits;
}

}  // namespace

RankedSlate MakeSlate(std::string player_id, std::string match_id,
                      std::span<const std::string> template_ids, std::span<const double> scores) {
  if (template_ids.size() != scores.size()) {
    throw std::invalid_argument("template and score counts differ");
  }
  RankedSlate slate{std::move(player_id), std::move(match_id), {}};
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < template_ids.size(); ++i) {
    if (!seen.insert(template_ids[i]).second) {
      throw std::invalid_argument("duplicate template " + template_ids[i]);
    }
    if (!std::isfinite(scores[i])) {
      throw std::invalid_argument("non-finite score for template " + template_ids[i]);
    }
    slate.ranked.emplace_back(template_ids[i], scores[i]);
  }
  std::sort(slate.ranked.begin(), slate.ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return slate;
}

RankedSlate PopularityRank(std::span<const ContestSpec> contests) {
  if (contests.empty()) throw std::invalid_argument("no contests to rank");
  std::vector<std::string> ids;
  std::vector<double> scores;
  for (const ContestSpec& c : contests) {
    ids.push_back(c.template_id);
    scores.push_back(static_cast<double>(c.prize_money.cents()));
  }
  return MakeSlate("", contests.front().match_id, ids, scores);
}

Scorer PopularityScorer() {
  return [](const ScoringQuery& q) {
    std::vector<double> scores;
    scores.reserve(q.templates.size());
    for (const ContestSpec* spec : q.templates) {
      scores.push_back(static_cast<double>(spec->prize_money.cents()));
    }
    return scores;
  };
}

Scorer ModelScorer(const WidirParams& params, const NormalizationStats& stats,
                   SnapshotSource& snapshots) {
  return [&params, &stats, &snapshots](const ScoringQuery& q) {
    return ScoreWithModel(params, stats, snapshots.Get(q.day), q.player_id, q.day, q.templates);
  };
}

RankedSlate ModelRank(const WidirParams& params, const FeatureSnapshot& snapshot,
                      const NormalizationStats& stats, std::string_view player_id,
                      std::string_view match_id, std::span<const ContestSpec> contests) {
  if (contests.empty()) throw std::invalid_argument("no contests to rank");
  std::vector<const ContestSpec*> specs;
  std::vector<std::string> ids;
  for (const ContestSpec& c : contests) {
    specs.push_back(&c);
    ids.push_back(c.template_id);
  }
  const std::vector<double> scores =
      ScoreWithModel(params, stats, snapshot, player_id, snapshot.as_of_day, specs);
  return MakeSlate(std::string(player_id), std::string(match_id), ids, scores);
}

double PrecisionAt(const RankedSlate& slate, const std::set<std::string>& joined, int h) {
  return static_cast<double>(HitsAt(slate, joined, h)) / h;
}

double RecallAt(const RankedSlate& slate, const std::set<std::string>& joined, int h) {
  if (joined.empty()) throw std::invalid_argument("recall needs a non-empty joined set");
  return static_cast<double>(HitsAt(slate, joined, h)) / static_cast<double>(joined.size());
}

double EvalReport::PrecisionAt(int h) const {
  for (std::size_t i = 0; i < cutoffs.size(); ++i)
    if (cutoffs[i] == h) return precision[i];
  throw std::out_of_range("cutoff not in report: " + std::to_string(h));
}

double EvalReport::RecallAt(int h) const {
  for (std::size_t i = 0; i < cutoffs.size(); ++i)
    if (cutoffs[i] == h) return recall[i];
  throw std::out_of_range("cutoff not in report: " + std::to_string(h));
}

std::string EvalReport::Serialize() const {
  std::string out = "model = " + model + "\nn_pairs = " + std::to_string(n_pairs) + "\n";
  char buf[96];
  for (std::size_t i = 0; i < cutoffs.size(); ++i) {
    std::snprintf(buf, sizeof buf, "precision@%d = %.17g\nrecall@%d = %.17g\n", cutoffs[i],
                  precision[i], cutoffs[i], recall[i]);
    out += buf;
  }
  return out;
}

EvalReport Evaluate(const std::string& model_name, const Scorer& scorer,
                    std::span<const JoinRecord> test_joins, const ContestCatalog& catalog,
                    std::span<const MatchRecord> matches, std::span<const int> cutoffs) {
  if (cutoffs.empty()) throw std::invalid_argument("no cutoffs");
  std::unordered_map<std::string, Timestamp> starts;
  for (const MatchRecord& m : matches) starts[m.match_id] = m.start_time;

  // (day, match, player) -> joined templates; the key order fixes the
  // reduction order independently of the record order.
  std::map<std::tuple<Day, std::string, std::string>, std::set<std::string>> groups;
  for (const JoinRecord& j : test_joins) {
    const ContestSpec* spec = catalog.Find(j.contest_id);
    if (spec == nullptr) throw DataError("join references unknown contest " + j.contest_id);
    const auto start = starts.find(j.match_id);
    if (start == starts.end()) throw DataError("join references unknown match " + j.match_id);
    groups[{FeatureDayForMatch(start->second), j.match_id, j.player_id}].insert(spec->template_id);
  }

  EvalReport report;
  report.model = model_name;
  report.cutoffs.assign(cutoffs.begin(), cutoffs.end());
  report.precision.assign(cutoffs.size(), 0.0);
  report.recall.assign(cutoffs.size(), 0.0);

  std::string cached_match;
  std::vector<const ContestSpec*> specs;
  for (const auto& [key, joined] : groups) {
    const auto& [day, match_id, player_id] = key;
    const std::vector<std::string>& tids = catalog.MatchTemplates(match_id);
    if (match_id != cached_match) {
      specs.clear();
      for (const std::string& tid : tids) specs.push_back(&catalog.Template(tid));
      cached_match = match_id;
    }
    const std::vector<double> scores = scorer(ScoringQuery{player_id, match_id, day, specs});
    const RankedSlate slate = MakeSlate(player_id, match_id, tids, scores);
    for (std::size_t i = 0; i < cutoffs.size(); ++i) {
      report.precision[i] += PrecisionAt(slate, joined, cutoffs[i]);
      report.recall[i] += RecallAt(slate, joined, cutoffs[i]);
    }
  }
  report.n_pairs = groups.size();
  if (report.n_pairs > 0) {
    for (std::size_t i = 0; i < cutoffs.size(); ++i) {
      report.precision[i] /= static_cast<double>(report.n_pairs);
      report.recall[i] /= static_cast<double>(report.n_pairs);
    }
  }
  return report;
}

}  // namespace widir
