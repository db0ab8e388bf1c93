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

#include "widir/batch.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "widir/data_io.hpp"
#include "widir/error.hpp"
#include "widir/evaluator.hpp"

namespace widir {

std::string RankingPayload::Serialize() const {
  std::string out = player_id + "\t" + match_id + "\t" + FormatTimestamp(generated_at) + "\t" +
                    model_version + "\t";
  char buf[32];
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (i > 0) out += ',';
    std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(ranked[i].second));
    out += ranked[i].first + ":" + buf;
  }
  return out;
}

RankingPayload RankingPayload::Parse(std::string_view line) {
  const std::vector<std::string_view> f = SplitFields(line, '\t');
  if (f.size() != 5) throw DataError("ranking payload: expected 5 fields, got " + std::to_string(f.size()));
  RankingPayload p;
  p.player_id = std::string(f[0]);
  p.match_id = std::string(f[1]);
  try {
    p.generated_at = ParseTimestamp(f[2]);
  } catch (const std::exception& e) {
    throw DataError(std::string("ranking payload: ") + e.what());
  }
  p.model_version = std::string(f[3]);
  if (!f[4].empty()) {
    for (std::string_view item : SplitFields(f[4], ',')) {
      const std::size_t colon = item.rfind(':');
      if (colon == std::string_view::npos || colon == 0) {
        throw DataError("ranking payload: bad item '" + std::string(item) + "'");
      }
      const std::string score(item.substr(colon + 1));
      char* end = nullptr;
      const float v = std::strtof(score.c_str(), &end);
      if (end == score.c_str() || *end != '\0' || !std::isfinite(v)) {
        throw DataError("ranking payload: bad score '" + score + "'");
      }
      p.ranked.emplace_back(std::string(item.substr(0, colon)), v);
    }
  }
  return p;
}

std::set<std::string> ActivePlayers(std::span<const JoinRecord> joins, Day as_of_day) {
  std::set<std::string> active;
  for (const JoinRecord& j : joins) {
    const Day d = DayOf(j.joining_time);
    if (d >= as_of_day - 30 && d <= as_of_day - 1) active.insert(j.player_id);
  }
  return active;
}

std::vector<RankingPayload> RunBatch(const WidirParams& params, const FeatureSnapshot& snapshot,
                                     const NormalizationStats& stats,
                                     std::span<const MatchRecord> upcoming,
                                     const ContestCatalog& catalog,
                                     const std::set<std::string>& active,
                                     const BatchOptions& options, RankingStore* store) {
  if (options.max_write_attempts < 1) throw ConfigError("max_write_attempts must be >= 1");
  std::vector<std::vector<ContestSpec>> live(upcoming.size());
  for (std::size_t m = 0; m < upcoming.size(); ++m) {
    for (const std::string& tid : catalog.MatchTemplates(upcoming[m].match_id)) {
      live[m].push_back(catalog.Template(tid));
    }
  }
  std::vector<RankingPayload> out;
  for (const std::string& pid : active) {
    for (std::size_t m = 0; m < upcoming.size(); ++m) {
      if (live[m].empty()) continue;
      const RankedSlate slate =
          ModelRank(params, snapshot, stats, pid, upcoming[m].match_id, live[m]);
      RankingPayload payload;
      payload.player_id = pid;
      payload.match_id = upcoming[m].match_id;
      payload.generated_at = options.generated_at;
      payload.model_version = options.model_version;
      for (const auto& [tid, score] : slate.ranked) {
        payload.ranked.emplace_back(tid, static_cast<float>(score));
      }
      if (store != nullptr) {
        for (int attempt = 1;; ++attempt) {
          try {
            store->Put(payload);
            break;
          } catch (const std::exception& e) {
            if (attempt >= options.max_write_attempts) {
              throw DataError("store write failed for player " + pid + ", match " +
                              payload.match_id + " after " + std::to_string(attempt) +
                              " attempts: " + e.what());
            }
          }
        }
      }
      out.push_back(std::move(payload));
    }
  }
  return out;
}

}  // namespace widir
