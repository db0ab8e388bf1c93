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

#include <array>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "widir/domain.hpp"
#include "widir/features.hpp"
#include "widir/model.hpp"

namespace widir {

struct RankedSlate {
  std::string player_id;
  std::string match_id;
  // Descending score; ties by template_id.
  std::vector<std::pair<std::string, double>> ranked;
};

// Sorts templates by score. Rejects duplicates and non-finite scores.
RankedSlate MakeSlate(std::string player_id, std::string match_id,
                      std::span<const std::string> template_ids, std::span<const double> scores);

// Orders contests by prize_money descending, ties by template_id.
RankedSlate PopularityRank(std::span<const ContestSpec> contests);

struct ScoringQuery {
  std::string_view player_id;
  std::string_view match_id;
  Day day = 0;
  std::span<const ContestSpec* const> templates;
};

// Returns one score per template in query order.
using Scorer = std::function<std::vector<double>(const ScoringQuery&)>;

Scorer PopularityScorer();
// Scores with the model using the snapshot of the query day.
Scorer ModelScorer(const WidirParams& params, const NormalizationStats& stats,
                   SnapshotSource& snapshots);

RankedSlate ModelRank(const WidirParams& params, const FeatureSnapshot& snapshot,
                      const NormalizationStats& stats, std::string_view player_id,
                      std::string_view match_id, std::span<const ContestSpec> contests);

double PrecisionAt(const RankedSlate& slate, const std::set<std::string>& joined, int h);
// Throws std::invalid_argument for an empty joined set.
double RecallAt(const RankedSlate& slate, const std::set<std::string>& joined, int h);

inline constexpr std::array<int, 4> kDefaultCutoffs = {1, 3, 5, 10};

struct EvalReport {
  std::string model;
  std::vector<int> cutoffs;
  std::vector<double> precision;
  std::vector<double> recall;
  std::size_t n_pairs = 0;

  double PrecisionAt(int h) const;
  double RecallAt(int h) const;
  // Flat key-value block.
  std::string Serialize() const;
};

// Macro-average over (player, match) pairs in `test_joins`.
EvalReport Evaluate(const std::string& model_name, const Scorer& scorer,
                    std::span<const JoinRecord> test_joins, const ContestCatalog& catalog,
                    std::span<const MatchRecord> matches, std::span<const int> cutoffs);

}  // namespace widir
