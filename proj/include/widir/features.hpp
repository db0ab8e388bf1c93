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
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "widir/domain.hpp"

namespace widir {

inline constexpr int kPlayerFeatureDims = 107;
inline constexpr int kContestFeatureDims = 11;
inline constexpr int kInteractionFeatureDims = 9;
inline constexpr int kNumBuckets = 8;
inline constexpr int kWindowBlockSize = 32;
inline constexpr std::array<int, 3> kPlayerWindows = {3, 7, 30};
inline constexpr int kInteractionLongWindow = 5;
inline constexpr int kActiveWindowDays = 30;
inline constexpr double kDaysSinceLastJoinCap = 365.0;
inline constexpr double kFeatureClip = 10.0;
inline constexpr double kStddevFloor = 1e-8;
inline constexpr std::string_view kFeatureSchemaVersion = "widir-features-v1";
// Day whose snapshot scores a match: the day joining opens, so no join of the
// match itself is visible to its features.
constexpr Day FeatureDayForMatch(Timestamp match_start) {
  return DayOf(match_start - kJoinLeadSeconds);
}

// Strictly increasing interior cut points; bucket(x) = #{edge <= x}, so the
// result is always in [0, kNumBuckets).
struct BucketEdges {
  std::vector<double> edges;

  int Bucket(double value) const;
  // Cut points at the k/8 sample quantiles (k = 1..7), deduplicated.
  static BucketEdges FromSample(std::vector<double> sample);

  bool operator==(const BucketEdges&) const = default;
};

struct ColumnStats {
  std::vector<double> mean;
  std::vector<double> stddev;

  bool operator==(const ColumnStats&) const = default;
};

struct NormalizationStats {
  ColumnStats player;
  ColumnStats contest;
  ColumnStats interaction;
  BucketEdges entry_fee;
  BucketEdges contest_size;
  BucketEdges prize_pool;

  std::string Serialize() const;
  static NormalizationStats Parse(std::string_view text);

  bool operator==(const NormalizationStats&) const = default;
};

// One join joined against its contest, in the form the feature code consumes.
struct JoinEvent {
  Timestamp time = 0;
  Day day = 0;
  std::string template_id;
  std::string match_id;
  ContestType contest_type = ContestType::kPublic;
  double entry_fee = 0.0;
  double prize_won = 0.0;
  double prize_pool = 0.0;
  int contest_size = 2;
  bool multi_entry = false;
  bool guaranteed = false;
};

// Per-player join history, each sorted by (time, template_id).
class PlayerHistoryIndex {
 public:
  PlayerHistoryIndex() = default;
  PlayerHistoryIndex(std::span<const JoinRecord> joins, const ContestCatalog& catalog);

  std::span<const JoinEvent> History(std::string_view player_id) const;
  // Sorted player ids.
  const std::vector<std::string>& players() const { return player_ids_; }

 private:
  std::unordered_map<std::string, std::vector<JoinEvent>> history_;
  std::vector<std::string> player_ids_;
};

// Un-normalized feature values (before log1p/z-score/clip).
std::array<double, kPlayerFeatureDims> RawPlayerFeatures(std::span<const JoinEvent> history,
                                                         Day as_of_day, const BucketEdges& fee,
                                                         const BucketEdges& size);
std::array<double, kContestFeatureDims> RawContestFeatures(const ContestSpec& spec);

// Summary of a recent join sufficient for interaction features.
struct RecentJoin {
  Day day = 0;
  ContestType contest_type = ContestType::kPublic;
  int fee_bucket = 0;
  int prize_bucket = 0;
  int size_bucket = 0;
  std::string template_id;

  bool operator==(const RecentJoin&) const = default;
};

std::vector<RecentJoin> SummarizeRecent(std::span<const JoinEvent> history, Day as_of_day,
                                        const NormalizationStats& stats);
std::array<double, kInteractionFeatureDims> RawInteractionFeatures(
    std::span<const RecentJoin> recent, const ContestSpec& target, Day as_of_day,
    const NormalizationStats& stats);

// True for columns that are log1p-transformed before z-scoring.
bool PlayerColumnIsLogScaled(int column);

NormalizationStats FitNormalization(std::span<const JoinRecord> train_joins,
                                    const ContestCatalog& catalog);

std::vector<float> PlayerFeatures(std::span<const JoinEvent> history, Day as_of_day,
                                  const NormalizationStats& stats);
std::vector<float> ColdStartPlayerFeatures(Day as_of_day, const NormalizationStats& stats);
// Throws std::invalid_argument for an invalid spec.
std::vector<float> ContestFeatures(const ContestSpec& spec, const NormalizationStats& stats);
std::vector<float> InteractionFeatures(std::span<const RecentJoin> recent, const ContestSpec& target,
                                       Day as_of_day, const NormalizationStats& stats);

struct FeatureTriple {
  std::vector<float> player;
  std::vector<float> contest;
  std::vector<float> interaction;
};

struct PlayerRow {
  std::vector<float> features;
  std::vector<RecentJoin> recent;

  bool operator==(const PlayerRow&) const = default;
};

struct FeatureSnapshot {
  Day as_of_day = 0;
  std::string schema_version{kFeatureSchemaVersion};
  std::map<std::string, PlayerRow> players;

  const PlayerRow* Find(std::string_view player_id) const;
  bool operator==(const FeatureSnapshot&) const = default;
};

// Rows for every player with a join in the 30 days before `day`.
FeatureSnapshot BuildSnapshot(const PlayerHistoryIndex& history, Day day,
                              const NormalizationStats& stats);

// Assembles a (player, contest, interaction) triple from a snapshot, falling
// back to the cold-start vector and empty recent history.
FeatureTriple MakeTriple(const FeatureSnapshot& snapshot, std::string_view player_id,
                         const ContestSpec& target, const NormalizationStats& stats);

// Day-partitioned offline store:
//   <root>/manifest.txt
//   <root>/day=YYYY-MM-DD/players.tsv
//   <root>/day=YYYY-MM-DD/recent.tsv
class OfflineFeatureStore {
 public:
  explicit OfflineFeatureStore(std::filesystem::path root) : root_(std::move(root)) {}

  void WriteManifest(const NormalizationStats& stats) const;
  NormalizationStats ReadManifest() const;
  void Write(const FeatureSnapshot& snapshot) const;
  FeatureSnapshot Read(Day day) const;
  bool Contains(Day day) const;
  std::vector<Day> Days() const;
  std::filesystem::path DayDirectory(Day day) const;
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

// Supplies snapshots by day to training, evaluation and inference.
class SnapshotSource {
 public:
  virtual ~SnapshotSource() = default;
  // Throws DataError when no snapshot exists for the day.
  virtual const FeatureSnapshot& Get(Day day) = 0;
};

// Builds snapshots on demand from a join history, caching the most recent few.
class ComputedSnapshots : public SnapshotSource {
 public:
  ComputedSnapshots(std::shared_ptr<const PlayerHistoryIndex> history, NormalizationStats stats,
                    std::size_t cache_size = 4);
  const FeatureSnapshot& Get(Day day) override;

 private:
  std::shared_ptr<const PlayerHistoryIndex> history_;
  NormalizationStats stats_;
  std::size_t cache_size_;
  std::vector<std::unique_ptr<FeatureSnapshot>> cache_;
};

class StoredSnapshots : public SnapshotSource {
 public:
  explicit StoredSnapshots(OfflineFeatureStore store, std::size_t cache_size = 4);
  const FeatureSnapshot& Get(Day day) override;

 private:
  OfflineFeatureStore store_;
  std::size_t cache_size_;
  std::vector<std::unique_ptr<FeatureSnapshot>> cache_;
};

}  // namespace widir
