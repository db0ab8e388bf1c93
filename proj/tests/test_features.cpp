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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "widir/data_io.hpp"
#include "widir/error.hpp"
#include "widir/features.hpp"
#include "widir/generator.hpp"

namespace widir {
namespace {

using testing::MakeContest;
using testing::SmallWorld;

JoinEvent Event(Day day, std::string match, ContestType type, double fee, double won, int size,
                bool multi = false, bool guaranteed = false, std::string tmpl = "t") {
  JoinEvent e;
  e.day = day;
  e.time = DayStart(day) + 3600;
  e.match_id = std::move(match);
  e.template_id = std::move(tmpl);
  e.contest_type = type;
  e.entry_fee = fee;
  e.prize_won = won;
  e.prize_pool = 10 * fee;
  e.contest_size = size;
  e.multi_entry = multi;
  e.guaranteed = guaranteed;
  return e;
}

constexpr auto P = ContestType::kPublic;
constexpr auto S = ContestType::kSpecial;
constexpr auto M = ContestType::kMega;

// Six joins over days 90..99 plus one on the as-of day, which must be ignored.
std::vector<JoinEvent> SixJoinHistory() {
  return {Event(90, "M2", P, 5, 0, 100),         Event(91, "M2", P, 20, 30, 10),
          Event(95, "M3", M, 49, 0, 100000, true, true),
          Event(97, "M4", P, 10, 15, 10),        Event(99, "M5", P, 10, 0, 10),
          Event(99, "M5", S, 50, 120, 2, true, true), Event(100, "M6", M, 49, 500, 100000)};
}

TEST(PlayerFeaturesTest, HandComputedSixJoinVector) {
  const BucketEdges fee{{5, 20, 50}};
  const BucketEdges size{{10, 100}};
  const auto raw = RawPlayerFeatures(SixJoinHistory(), 100, fee, size);
  // Window blocks: totals, distinct types/sizes/fees, avg/max fee, avg/max prize,
  // fee sum, win rate, distinct matches, multi, guaranteed, type counts[3],
  // fee buckets[8], size buckets[8].
  const std::vector<double> k3 = {3, 2, 2, 2, 70.0 / 3, 50, 45, 120, 70, 2.0 / 3, 2, 1, 1,
                                  2, 1, 0,
                                  0, 2, 0, 1, 0, 0, 0, 0,
                                  1, 2, 0, 0, 0, 0, 0, 0};
  const std::vector<double> k7 = {4, 3, 3, 3, 29.75, 50, 33.75, 120, 119, 0.5, 3, 2, 2,
                                  2, 1, 1,
                                  0, 2, 1, 1, 0, 0, 0, 0,
                                  1, 2, 1, 0, 0, 0, 0, 0};
  const std::vector<double> k30 = {6, 3, 4, 5, 24, 50, 27.5, 120, 144, 0.5, 4, 2, 2,
                                   4, 1, 1,
                                   0, 3, 2, 1, 0, 0, 0, 0,
                                   1, 3, 2, 0, 0, 0, 0, 0};
  const std::vector<double> life = {1, 6, 3, 24, 50, 144, 27.5, 120, 0.5, 4, 2.0 / 6};
  std::vector<double> expected;
  for (const auto* block : {&k3, &k7, &k30, &life}) {
    expected.insert(expected.end(), block->begin(), block->end());
  }
  ASSERT_EQ(expected.size(), 107u);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_DOUBLE_EQ(raw[i], expected[i]) << "column " << i;
  }
}

TEST(PlayerFeaturesTest, SingleJoinYesterday) {
  const auto raw = RawPlayerFeatures(std::vector<JoinEvent>{Event(49, "M", P, 10, 0, 10)}, 50,
                                     BucketEdges{}, BucketEdges{});
  for (int w = 0; w < 3; ++w) {
    EXPECT_EQ(raw[w * kWindowBlockSize + 0], 1.0);
    EXPECT_EQ(raw[w * kWindowBlockSize + 9], 0.0);
  }
  EXPECT_EQ(raw[96], 1.0);
}

TEST(PlayerFeaturesTest, EmptyHistoryIsColdStart) {
  const auto raw = RawPlayerFeatures({}, 50, BucketEdges{}, BucketEdges{});
  for (int i = 0; i < kPlayerFeatureDims; ++i) {
    EXPECT_EQ(raw[i], i == 96 ? kDaysSinceLastJoinCap : 0.0) << i;
  }
  NormalizationStats stats;
  stats.player = {std::vector<double>(kPlayerFeatureDims, 0.5),
                  std::vector<double>(kPlayerFeatureDims, 2.0)};
  const auto cold = ColdStartPlayerFeatures(50, stats);
  EXPECT_EQ(cold, PlayerFeatures({}, 50, stats));
  EXPECT_EQ(cold, ColdStartPlayerFeatures(50, stats));
  EXPECT_EQ(cold.size(), 107u);
}

TEST(PlayerFeaturesTest, LogScaledColumns) {
  EXPECT_FALSE(PlayerColumnIsLogScaled(9));
  EXPECT_FALSE(PlayerColumnIsLogScaled(32 + 9));
  EXPECT_FALSE(PlayerColumnIsLogScaled(64 + 9));
  EXPECT_FALSE(PlayerColumnIsLogScaled(96 + 8));
  EXPECT_FALSE(PlayerColumnIsLogScaled(96 + 10));
  EXPECT_TRUE(PlayerColumnIsLogScaled(0));
  EXPECT_TRUE(PlayerColumnIsLogScaled(96));
  EXPECT_TRUE(PlayerColumnIsLogScaled(106 - 1));
}

ContestSpec MegaHandContest() {
  ContestSpec c = MakeContest("c1", "mega", "m", 49, 1000000, 100000, M);
  c.prize_distribution.tiers = {{1, 1, Money::FromUnits(500000)}, {2, 1000, Money::FromUnits(500)}};
  c.guaranteed = true;
  c.multi_entry = true;
  return c;
}

TEST(ContestFeaturesTest, MegaHandCase) {
  const ContestSpec c = MegaHandContest();
  const auto raw = RawContestFeatures(c);
  const std::array<double, 11> expected_raw = {49, 1e6, 1e5, 0, 0, 1, 1, 1, 0.5, 0.01, 1e6 / 49};
  for (int i = 0; i < 11; ++i) EXPECT_DOUBLE_EQ(raw[i], expected_raw[i]) << i;

  NormalizationStats stats;
  stats.contest.mean = {2, 2, 2, 0, 0, 0, 0, 0, 0, 0, 2};
  stats.contest.stddev = {4, 1, 4, 1, 1, 1, 1, 1, 1, 1, 4};
  const auto v = ContestFeatures(c, stats);
  EXPECT_FLOAT_EQ(v[0], static_cast<float>((3.912023005428146 - 2) / 4));
  EXPECT_FLOAT_EQ(v[1], 10.0f);  // (13.8155 - 2) / 1 clipped
  EXPECT_FLOAT_EQ(v[2], static_cast<float>((11.51293546492023 - 2) / 4));
  EXPECT_FLOAT_EQ(v[5], 1.0f);
  EXPECT_FLOAT_EQ(v[8], 0.5f);
  EXPECT_FLOAT_EQ(v[9], 0.01f);
  EXPECT_FLOAT_EQ(v[10], static_cast<float>((9.923739258653187 - 2) / 4));
}

TEST(ContestFeaturesTest, TemplateLevelAndFreeEntry) {
  NormalizationStats stats;
  stats.contest = {std::vector<double>(11, 0.0), std::vector<double>(11, 1.0)};
  ContestSpec a = MegaHandContest();
  ContestSpec b = a;
  b.contest_id = "c2";
  EXPECT_EQ(ContestFeatures(a, stats), ContestFeatures(b, stats));
  const ContestSpec free = MakeContest("f", "free", "m", 0, 100, 10);
  const auto raw = RawContestFeatures(free);
  EXPECT_DOUBLE_EQ(raw[10], 100 / 0.01);
  for (float x : ContestFeatures(free, stats)) EXPECT_TRUE(std::isfinite(x));
  EXPECT_FLOAT_EQ(ContestFeatures(free, stats)[10], static_cast<float>(9.210440366976517));
  ContestSpec bad = free;
  bad.contest_size = 1;
  EXPECT_THROW(ContestFeatures(bad, stats), std::invalid_argument);
}

NormalizationStats BucketStats() {
  NormalizationStats s;
  s.entry_fee = BucketEdges{{5, 20, 50}};
  s.contest_size = BucketEdges{{10, 100}};
  s.prize_pool = BucketEdges{{100, 1000}};
  s.interaction = {std::vector<double>(9, 0.0), std::vector<double>(9, 1.0)};
  return s;
}

RecentJoin Recent(Day day, ContestType type, int fee_b, int prize_b, int size_b,
                  std::string tmpl = "x") {
  return {day, type, fee_b, prize_b, size_b, std::move(tmpl)};
}

TEST(InteractionFeaturesTest, Examples) {
  const NormalizationStats stats = BucketStats();
  // Target: fee 10 -> bucket 1, prize 500 -> bucket 1, size 50 -> bucket 1.
  const ContestSpec target = MakeContest("c", "T", "m", 10, 500, 50, P);
  const auto none = RawInteractionFeatures({}, target, 100, stats);
  for (double x : none) EXPECT_EQ(x, 0.0);

  const std::vector<RecentJoin> three = {Recent(99, P, 0, 0, 0), Recent(99, P, 2, 2, 2),
                                         Recent(99, P, 3, 0, 2)};
  const auto r = RawInteractionFeatures(three, target, 100, stats);
  EXPECT_EQ(r[0], 3.0);
  EXPECT_EQ(r[4], 3.0);
  for (int k : {1, 2, 3, 5, 6, 7, 8}) EXPECT_EQ(r[k], 0.0) << k;

  // One day ago, three days ago, five days ago, six days ago (outside).
  const std::vector<RecentJoin> four = {Recent(99, S, 1, 0, 1, "T"), Recent(97, P, 1, 1, 0),
                                        Recent(95, P, 0, 1, 1, "T"), Recent(94, P, 1, 1, 1, "T")};
  const auto o = RawInteractionFeatures(four, target, 100, stats);
  const std::array<double, 9> expected = {0, 1, 0, 1, 2, 2, 2, 2, 2};
  for (int k = 0; k < 9; ++k) EXPECT_EQ(o[k], expected[k]) << k;
  const auto v = InteractionFeatures(four, target, 100, stats);
  EXPECT_FLOAT_EQ(v[4], static_cast<float>(std::log1p(2.0)));
}

TEST(BucketEdgesTest, UniformFeesGiveEqualMass) {
  std::vector<double> fees;
  for (int i = 1; i <= 800; ++i) fees.push_back(i);
  const BucketEdges b = BucketEdges::FromSample(fees);
  ASSERT_EQ(b.edges.size(), 7u);
  std::array<int, 8> mass{};
  for (double f : fees) ++mass[b.Bucket(f)];
  for (int m : mass) EXPECT_EQ(m, 100);
  // Exact k/8 quantiles of {1..800} lie at k*100 + 0.5.
  for (int k = 1; k <= 7; ++k) EXPECT_NEAR(b.edges[k - 1], k * 100 + 0.5, 1.0);
}

TEST(BucketEdgesTest, DiscreteSampleDeduplicates) {
  const BucketEdges b = BucketEdges::FromSample({1, 1, 1, 1, 1, 1, 1, 1, 5, 5, 9});
  EXPECT_TRUE(std::is_sorted(b.edges.begin(), b.edges.end()));
  EXPECT_EQ(std::adjacent_find(b.edges.begin(), b.edges.end()), b.edges.end());
  for (double x : {0.0, 1.0, 5.0, 9.0, 1e9}) {
    EXPECT_GE(b.Bucket(x), 0);
    EXPECT_LT(b.Bucket(x), kNumBuckets);
  }
  EXPECT_EQ(b.Bucket(1.0), 0);
}

struct World {
  Dataset data;
  ContestCatalog catalog;
  std::vector<JoinRecord> train;
  NormalizationStats stats;
  Day mid = 0;
};

const World& SharedWorld() {
  static const World w = [] {
    World w;
    w.data = GenerateSynthetic(SmallWorld(), 1);
    w.catalog = ContestCatalog(w.data.contests);
    w.mid = SmallWorld().start_day + 25;
    for (const auto& j : w.data.joins)
      if (DayOf(j.joining_time) < w.mid) w.train.push_back(j);
    w.stats = FitNormalization(w.train, w.catalog);
    return w;
  }();
  return w;
}

TEST(NormalizationTest, DeterministicAndShaped) {
  const World& w = SharedWorld();
  EXPECT_EQ(FitNormalization(w.train, w.catalog), w.stats);
  EXPECT_EQ(w.stats.player.mean.size(), 107u);
  EXPECT_EQ(w.stats.contest.mean.size(), 11u);
  EXPECT_EQ(w.stats.interaction.mean.size(), 9u);
  EXPECT_EQ(NormalizationStats::Parse(w.stats.Serialize()), w.stats);
  EXPECT_THROW(FitNormalization({}, w.catalog), std::invalid_argument);
}

TEST(NormalizationTest, ConstantColumnFloorsStddev) {
  const ContestSpec c = MakeContest("c1", "t1", "m1", 10, 100, 10);
  const ContestCatalog catalog({c});
  std::vector<JoinRecord> joins;
  for (int d = 0; d < 5; ++d) {
    joins.push_back(testing::MakeJoin("p" + std::to_string(d), c, DayStart(100 + d)));
  }
  const NormalizationStats s = FitNormalization(joins, catalog);
  EXPECT_EQ(s.contest.stddev[0], kStddevFloor);
  EXPECT_EQ(ContestFeatures(c, s)[0], 0.0f);
}

std::vector<JoinRecord> Before(const std::vector<JoinRecord>& joins, Day day) {
  std::vector<JoinRecord> out;
  for (const auto& j : joins)
    if (DayOf(j.joining_time) < day) out.push_back(j);
  return out;
}

TEST(SnapshotTest, NoLeakage) {
  const World& w = SharedWorld();
  for (Day day : {w.mid, w.mid + 5, w.mid + 12}) {
    const PlayerHistoryIndex full(w.data.joins, w.catalog);
    const PlayerHistoryIndex cut(Before(w.data.joins, day), w.catalog);
    EXPECT_EQ(BuildSnapshot(full, day, w.stats), BuildSnapshot(cut, day, w.stats)) << day;
  }
}

TEST(SnapshotTest, PermutationInvariant) {
  const World& w = SharedWorld();
  std::vector<JoinRecord> shuffled = w.data.joins;
  Rng rng(4);
  rng.Shuffle(shuffled);
  const PlayerHistoryIndex a(w.data.joins, w.catalog), b(shuffled, w.catalog);
  EXPECT_EQ(BuildSnapshot(a, w.mid, w.stats), BuildSnapshot(b, w.mid, w.stats));
  std::vector<JoinRecord> train = w.train;
  rng.Shuffle(train);
  EXPECT_EQ(FitNormalization(train, w.catalog), w.stats);
}

TEST(SnapshotTest, WindowNesting) {
  const World& w = SharedWorld();
  const PlayerHistoryIndex index(w.data.joins, w.catalog);
  const std::vector<int> monotone = {0, 1, 2, 3, 5, 7, 8, 10, 11, 12};
  int checked = 0;
  for (const std::string& p : index.players()) {
    const auto h = index.History(p);
    const auto raw = RawPlayerFeatures(h, w.mid, w.stats.entry_fee, w.stats.contest_size);
    auto col = [&](int w_idx, int c) { return raw[w_idx * kWindowBlockSize + c]; };
    for (int c : monotone) {
      EXPECT_LE(col(0, c), col(1, c));
      EXPECT_LE(col(1, c), col(2, c));
    }
    for (int c = 13; c < 32; ++c) {
      EXPECT_LE(col(0, c), col(1, c));
      EXPECT_LE(col(1, c), col(2, c));
    }
    const auto recent = SummarizeRecent(h, w.mid, w.stats);
    for (const std::string& t : w.catalog.MatchTemplates(w.data.matches[10].match_id)) {
      const auto r = RawInteractionFeatures(recent, w.catalog.Template(t), w.mid, w.stats);
      for (int k = 0; k < 4; ++k) EXPECT_LE(r[k], r[4 + k]);
    }
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(SnapshotTest, ActiveWindowBoundary) {
  const ContestSpec c = MakeContest("c1", "t1", "m1", 10, 100, 10);
  const ContestCatalog catalog({c});
  const Day day = 200;
  const std::vector<JoinRecord> joins = {testing::MakeJoin("in", c, DayStart(day - 30) + 5),
                                         testing::MakeJoin("out", c, DayStart(day - 31) + 5),
                                         testing::MakeJoin("today", c, DayStart(day) + 5)};
  const NormalizationStats stats = FitNormalization(joins, catalog);
  const FeatureSnapshot s = BuildSnapshot(PlayerHistoryIndex(joins, catalog), day, stats);
  EXPECT_NE(s.Find("in"), nullptr);
  EXPECT_EQ(s.Find("out"), nullptr);
  EXPECT_EQ(s.Find("today"), nullptr);
  const FeatureTriple cold = MakeTriple(s, "nobody", c, stats);
  EXPECT_EQ(cold.player, ColdStartPlayerFeatures(day, stats));
  EXPECT_EQ(cold.player.size(), 107u);
  EXPECT_EQ(cold.contest.size(), 11u);
  EXPECT_EQ(cold.interaction.size(), 9u);
}

class StoreTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = std::filesystem::temp_directory_path() / "widir_store_test";
    std::filesystem::remove_all(root_);
  }
  void TearDown() override { std::filesystem::remove_all(root_); }
  std::filesystem::path root_;
};

TEST_F(StoreTest, RoundTripIsBitwise) {
  const World& w = SharedWorld();
  const OfflineFeatureStore store(root_);
  store.WriteManifest(w.stats);
  const FeatureSnapshot snap = BuildSnapshot(PlayerHistoryIndex(w.data.joins, w.catalog), w.mid, w.stats);
  ASSERT_FALSE(snap.players.empty());
  store.Write(snap);
  EXPECT_TRUE(store.Contains(w.mid));
  EXPECT_FALSE(store.Contains(w.mid + 1));
  EXPECT_EQ(store.Days(), std::vector<Day>{w.mid});
  EXPECT_EQ(store.Read(w.mid), snap);
  EXPECT_EQ(store.ReadManifest(), w.stats);
  StoredSnapshots stored(store);
  EXPECT_EQ(stored.Get(w.mid), snap);
  EXPECT_THROW(stored.Get(w.mid + 1), DataError);
  ComputedSnapshots computed(std::make_shared<PlayerHistoryIndex>(w.data.joins, w.catalog), w.stats);
  EXPECT_EQ(computed.Get(w.mid), snap);
}

TEST_F(StoreTest, SchemaMismatchIsReported) {
  const World& w = SharedWorld();
  const OfflineFeatureStore store(root_);
  store.Write(BuildSnapshot(PlayerHistoryIndex(w.data.joins, w.catalog), w.mid, w.stats));
  const auto path = store.DayDirectory(w.mid) / "players.tsv";
  std::string text = ReadFile(path);
  const auto pos = text.find(kFeatureSchemaVersion);
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, kFeatureSchemaVersion.size(), "widir-features-v0");
  WriteFileAtomic(path, text);
  try {
    store.Read(w.mid);
    FAIL();
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("schema version mismatch"), std::string::npos) << msg;
    EXPECT_NE(msg.find(FormatDay(w.mid)), std::string::npos) << msg;
  }
  try {
    store.Read(w.mid + 3);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(FormatDay(w.mid + 3)), std::string::npos);
  }
}

}  // namespace
}  // namespace widir
