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

#include <filesystem>

#include "fixtures.hpp"
#include "widir/data_io.hpp"
#include "widir/domain.hpp"
#include "widir/error.hpp"
#include "widir/kv_config.hpp"
#include "widir/money.hpp"
#include "widir/time.hpp"

namespace widir {
namespace {

using testing::MakeContest;
using testing::MakeJoin;

TEST(MoneyTest, ParseAndFormat) {
  EXPECT_EQ(Money::Parse("12").cents(), 1200);
  EXPECT_EQ(Money::Parse("12.3").cents(), 1230);
  EXPECT_EQ(Money::Parse("12.34").cents(), 1234);
  EXPECT_EQ(Money::Parse("-0.05").cents(), -5);
  EXPECT_EQ(Money::FromCents(-5).ToString(), "-0.05");
  EXPECT_EQ(Money::FromUnits(49).ToString(), "49.00");
  EXPECT_THROW(Money::Parse("1.234"), std::invalid_argument);
  EXPECT_THROW(Money::Parse("abc"), std::invalid_argument);
  EXPECT_THROW(Money::Parse(""), std::invalid_argument);
  EXPECT_THROW(Money::Parse("-"), std::invalid_argument);
}

TEST(MoneyTest, RoundTripAndArithmetic) {
  for (long long c : {0LL, 1LL, 99LL, 100LL, 123456789LL, -250LL}) {
    const Money m = Money::FromCents(c);
    EXPECT_EQ(Money::Parse(m.ToString()), m);
  }
  EXPECT_EQ(Money::FromDouble(0.105).cents(), 11);
  EXPECT_EQ(Money::FromDouble(-0.105).cents(), -11);
  EXPECT_EQ((Money::FromUnits(3) - Money::FromCents(50)).cents(), 250);
  EXPECT_EQ((Money::FromCents(7) * 3).cents(), 21);
  EXPECT_LT(Money::FromCents(1), Money::FromCents(2));
}

TEST(TimeTest, CivilDaysAndFormat) {
  EXPECT_EQ(DaysFromCivil(1970, 1, 1), 0);
  EXPECT_EQ(DaysFromCivil(2024, 1, 1), 19723);
  EXPECT_EQ(DaysFromCivil(2024, 3, 1) - DaysFromCivil(2024, 2, 1), 29);
  EXPECT_EQ(FormatDay(DaysFromCivil(2024, 2, 29)), "2024-02-29");
  EXPECT_EQ(ParseDay("2023-12-31"), DaysFromCivil(2023, 12, 31));
  const Timestamp t = DayStart(DaysFromCivil(2024, 5, 6)) + 3600 * 13 + 60 * 7 + 9;
  EXPECT_EQ(FormatTimestamp(t), "2024-05-06T13:07:09Z");
  EXPECT_EQ(ParseTimestamp("2024-05-06T13:07:09Z"), t);
  EXPECT_THROW(ParseDay("2024-13-01"), std::invalid_argument);
  EXPECT_THROW(ParseTimestamp("2024-05-06 13:07:09"), std::invalid_argument);
}

TEST(TimeTest, DayOfFloorsNegative) {
  EXPECT_EQ(DayOf(0), 0);
  EXPECT_EQ(DayOf(86399), 0);
  EXPECT_EQ(DayOf(86400), 1);
  EXPECT_EQ(DayOf(-1), -1);
  EXPECT_EQ(DayOf(-86400), -1);
  EXPECT_EQ(DayOf(-86401), -2);
}

TEST(KeyValueConfigTest, ParseAndErrors) {
  const auto kv = KeyValueConfig::Parse("# c\n a = 1 \nb=x y\n\nc = 2.5\n", "t.conf");
  EXPECT_EQ(kv.GetInt("a", 0), 1);
  EXPECT_EQ(kv.GetString("b", ""), "x y");
  EXPECT_DOUBLE_EQ(kv.GetDouble("c", 0), 2.5);
  EXPECT_EQ(kv.GetInt("missing", 7), 7);
  EXPECT_THROW(kv.GetInt("b", 0), ConfigError);
  EXPECT_THROW(KeyValueConfig::Parse("novalue\n"), ConfigError);
  EXPECT_THROW(KeyValueConfig::Parse("a=1\na=2\n"), ConfigError);
  try {
    kv.RequireKnownKeys({"a", "c"});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos);
  }
  EXPECT_EQ(KeyValueConfig::Parse(kv.Serialize()).values(), kv.values());
}

ContestSpec MegaContest() {
  ContestSpec c = MakeContest("c1", "t1", "m1", 49, 1000000, 100000, ContestType::kMega);
  c.prize_distribution.tiers = {{1, 1, Money::FromUnits(100000)},
                                {2, 10, Money::FromUnits(10000)},
                                {11, 1000, Money::FromUnits(100)}};
  c.guaranteed = true;
  c.multi_entry = true;
  return c;
}

TEST(ValidateContestTest, Examples) {
  EXPECT_TRUE(ValidateContest(MegaContest()).empty());

  ContestSpec over = MakeContest("c2", "t2", "m1", 10, 100, 4);
  over.prize_distribution.tiers = {{1, 5, Money::FromUnits(20)}};
  EXPECT_EQ(ValidateContest(over), std::vector<std::string>{"prize_distribution exceeds contest_size"});

  ContestSpec inc = MakeContest("c3", "t3", "m1", 10, 100, 10);
  inc.prize_distribution.tiers = {{1, 1, Money::FromUnits(10)}, {2, 2, Money::FromUnits(20)}};
  EXPECT_EQ(ValidateContest(inc), std::vector<std::string>{"prize_per_rank not non-increasing"});
}

TEST(ValidateContestTest, OtherRules) {
  ContestSpec c = MakeContest("c", "t", "m", 10, 100, 1);
  EXPECT_FALSE(ValidateContest(c).empty());
  c = MakeContest("c", "t", "m", 10, 100, 10);
  c.prize_distribution.tiers = {{2, 3, Money::FromUnits(10)}};
  EXPECT_FALSE(ValidateContest(c).empty());
  c.prize_distribution.tiers = {{1, 2, Money::FromUnits(60)}};
  const auto v = ValidateContest(c);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("exceeds prize_money"), std::string::npos);
  c.prize_distribution.tiers.clear();
  EXPECT_FALSE(ValidateContest(c).empty());
}

TEST(PrizeStatsTest, Examples) {
  PrizeDistribution d{{{1, 1, Money::FromUnits(100)}}};
  auto s = ComputePrizeStats(d, 2, Money::FromUnits(100));
  EXPECT_EQ(s.top_prize_fraction, 1.0);
  EXPECT_EQ(s.winner_fraction, 0.5);

  d.tiers = {{1, 5, Money::FromUnits(20)}};
  s = ComputePrizeStats(d, 10, Money::FromUnits(100));
  EXPECT_EQ(s.top_prize_fraction, 0.2);
  EXPECT_EQ(s.winner_fraction, 0.5);

  d.tiers = {{1, 1, Money::FromUnits(50)}, {2, 4, Money::FromUnits(10)}};
  s = ComputePrizeStats(d, 10, Money::FromUnits(80));
  EXPECT_EQ(s.top_prize_fraction, 50.0 / 80.0);
  EXPECT_EQ(s.winner_fraction, 4.0 / 10.0);
  EXPECT_EQ(s.top_prize_fraction, 0.625);

  EXPECT_THROW(ComputePrizeStats(d, 10, Money()), std::invalid_argument);
  EXPECT_THROW(ComputePrizeStats(d, 10, Money::FromUnits(-1)), std::invalid_argument);
}

TEST(PrizeDistributionTest, Payouts) {
  PrizeDistribution d{{{1, 1, Money::FromUnits(50)}, {2, 4, Money::FromUnits(10)}}};
  EXPECT_EQ(d.TotalPayout(), Money::FromUnits(80));
  EXPECT_EQ(d.PaidRanks(), 4);
  EXPECT_EQ(d.PrizeForRank(1), Money::FromUnits(50));
  EXPECT_EQ(d.PrizeForRank(3), Money::FromUnits(10));
  EXPECT_EQ(d.PrizeForRank(5), Money());
}

TEST(CatalogTest, IndexesTemplatesPerMatch) {
  const ContestCatalog cat({MakeContest("c1", "tB", "m1", 1, 10, 2),
                            MakeContest("c2", "tA", "m1", 1, 10, 2),
                            MakeContest("c3", "tA", "m1", 1, 10, 2),
                            MakeContest("c4", "tC", "m2", 1, 10, 2)});
  EXPECT_EQ(cat.MatchTemplates("m1"), (std::vector<std::string>{"tA", "tB"}));
  EXPECT_EQ(cat.FindTemplate("tA")->contest_id, "c2");
  EXPECT_EQ(cat.Find("c3")->template_id, "tA");
  EXPECT_EQ(cat.Find("zz"), nullptr);
  EXPECT_EQ(cat.MatchIds(), (std::vector<std::string>{"m1", "m2"}));
  EXPECT_THROW(ContestCatalog({MakeContest("c1", "t", "m", 1, 10, 2),
                               MakeContest("c1", "u", "m", 1, 10, 2)}),
               std::invalid_argument);
}

Dataset TinyDataset() {
  Dataset d;
  ContestSpec mega = MegaContest();
  d.contests = {mega, MakeContest("c2", "t2", "m1", 10, 100, 10)};
  d.matches = {{"m1", 1000000, {"c1", "c2"}}};
  d.joins = {MakeJoin("p1", d.contests[0], 999000, 100), MakeJoin("p2", d.contests[1], 5)};
  d.players = {{"p1", {}}, {"p2", {}}};
  return d;
}

TEST(IntegrityTest, ConsistentDatasetIsClean) { EXPECT_TRUE(CheckIntegrity(TinyDataset()).empty()); }

TEST(IntegrityTest, DetectsViolations) {
  Dataset d = TinyDataset();
  d.joins.push_back({"p3", "nope", "m1", 10, Money(), Money()});
  d.joins.push_back({"p3", "c2", "m1", 1000000, Money::FromUnits(10), Money()});
  d.joins.push_back({"p3", "c2", "m1", 10, Money::FromUnits(11), Money()});
  const auto problems = CheckIntegrity(d);
  EXPECT_EQ(problems.size(), 3u);
  d = TinyDataset();
  d.contests[1].contest_type = ContestType::kMega;
  EXPECT_EQ(CheckIntegrity(d).size(), 1u);  // two Mega templates
}

TEST(DataIoTest, RecordsRoundTrip) {
  const Dataset d = TinyDataset();
  for (const ContestSpec& c : d.contests) EXPECT_EQ(ParseContest(FormatContest(c)), c);
  for (const JoinRecord& j : d.joins) EXPECT_EQ(ParseJoin(FormatJoin(j)), j);
  EXPECT_EQ(ParseMatch(FormatMatch(d.matches[0])), d.matches[0]);
  PlayerProfile p{"p9", {1.5, 2.25, 0.5, 0.75, 0.125, 3.0, 0.2}};
  EXPECT_EQ(ParsePlayer(FormatPlayer(p)), p);
  EXPECT_THROW(ParseJoin("a\tb"), std::invalid_argument);
}

TEST(DataIoTest, DatasetFilesRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "widir_dataio_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const Dataset d = TinyDataset();
  WriteDataset(DatasetPaths::InDirectory(dir), d);
  const Dataset back = ReadDataset(DatasetPaths::InDirectory(dir));
  EXPECT_EQ(back.contests, d.contests);
  EXPECT_EQ(back.matches, d.matches);
  EXPECT_EQ(back.joins, d.joins);
  EXPECT_EQ(back.players, d.players);
  EXPECT_THROW(ReadJoins(dir / "missing.tsv"), DataError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace widir
