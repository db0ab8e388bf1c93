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
#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <thread>

#include "fixtures.hpp"
#include "widir/batch.hpp"
#include "widir/generator.hpp"
#include "widir/random.hpp"
#include "widir/serving.hpp"

namespace widir {
namespace {

using testing::MakeContest;
using testing::MakeJoin;

TEST(ActivePlayersTest, ThirtyDayWindow) {
  const ContestSpec c = MakeContest("c", "t", "m", 1, 10, 10);
  const Day today = 500;
  const std::vector<JoinRecord> joins = {
      MakeJoin("in30", c, DayStart(today - 30)),       MakeJoin("out31", c, DayStart(today - 31) + 86399),
      MakeJoin("yesterday", c, DayStart(today) - 1), MakeJoin("today", c, DayStart(today))};
  EXPECT_EQ(ActivePlayers(joins, today), (std::set<std::string>{"in30", "yesterday"}));
  EXPECT_TRUE(ActivePlayers({}, today).empty());
}

struct BatchWorld {
  Dataset data;
  std::unique_ptr<ContestCatalog> catalog;
  NormalizationStats stats;
  FeatureSnapshot snapshot;
  WidirParams params;
  std::vector<MatchRecord> upcoming;
  std::set<std::string> active;
};

BatchWorld MakeBatchWorld() {
  BatchWorld w;
  const GeneratorConfig g = testing::SmallWorld();
  w.data = GenerateSynthetic(g, 4);
  w.catalog = std::make_unique<ContestCatalog>(w.data.contests);
  w.stats = FitNormalization(w.data.joins, *w.catalog);
  const Day day = g.start_day + g.days - 5;
  w.snapshot = BuildSnapshot(PlayerHistoryIndex(w.data.joins, *w.catalog), day, w.stats);
  w.params = InitParams<float>(WidirDims{kPlayerFeatureDims, kContestFeatureDims, kInteractionFeatureDims}, 2);
  for (const MatchRecord& m : w.data.matches)
    if (FeatureDayForMatch(m.start_time) == day) w.upcoming.push_back(m);
  if (w.upcoming.empty()) w.upcoming.push_back(w.data.matches.back());
  w.active = ActivePlayers(w.data.joins, day);
  w.active.insert("cold-player");
  return w;
}

TEST(BatchTest, IdempotentAndMatchesModelRank) {
  const BatchWorld w = MakeBatchWorld();
  ASSERT_GT(w.active.size(), 10u);
  OnlineStore store;
  const BatchOptions opt{"v1", 12345, 3};
  const auto a = RunBatch(w.params, w.snapshot, w.stats, w.upcoming, *w.catalog, w.active, opt, &store);
  const auto b = RunBatch(w.params, w.snapshot, w.stats, w.upcoming, *w.catalog, w.active, opt, nullptr);
  ASSERT_EQ(a.size(), w.active.size() * w.upcoming.size());
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].Serialize(), b[i].Serialize());
  EXPECT_EQ(store.size(), a.size());
  EXPECT_EQ(store.model_version(), "v1");

  for (const RankingPayload& p : a) {
    EXPECT_TRUE(w.active.contains(p.player_id));
    std::vector<ContestSpec> contests;
    for (const auto& t : w.catalog->MatchTemplates(p.match_id)) contests.push_back(w.catalog->Template(t));
    EXPECT_EQ(p.ranked.size(), contests.size());
    const RankedSlate slate = ModelRank(w.params, w.snapshot, w.stats, p.player_id, p.match_id, contests);
    for (std::size_t i = 0; i < slate.ranked.size(); ++i) {
      EXPECT_EQ(p.ranked[i].first, slate.ranked[i].first);
      EXPECT_EQ(p.ranked[i].second, static_cast<float>(slate.ranked[i].second));
    }
    EXPECT_EQ(store.Get(p.player_id, p.match_id)->payload, p);
  }
  // The cold player is not in the snapshot but still gets a payload.
  EXPECT_EQ(w.snapshot.Find("cold-player"), nullptr);
  EXPECT_NE(store.Get("cold-player", w.upcoming[0].match_id), nullptr);
}

TEST(BatchTest, NewerVersionReplacesOlder) {
  const BatchWorld w = MakeBatchWorld();
  OnlineStore store;
  RunBatch(w.params, w.snapshot, w.stats, w.upcoming, *w.catalog, w.active, {"v1", 1, 3}, &store);
  RunBatch(w.params, w.snapshot, w.stats, w.upcoming, *w.catalog, w.active, {"v2", 2, 3}, &store);
  for (const auto& pid : w.active) {
    EXPECT_EQ(store.Get(pid, w.upcoming[0].match_id)->payload.model_version, "v2");
  }
}

class FlakyStore : public RankingStore {
 public:
  explicit FlakyStore(int failures) : failures_(failures) {}
  void Put(RankingPayload payload) override {
    if (calls_++ < failures_) throw std::runtime_error("transient");
    last_ = std::move(payload);
  }
  int calls_ = 0;
  RankingPayload last_;

 private:
  int failures_;
};

TEST(BatchTest, RetriesThenSurfacesContext) {
  const BatchWorld w = MakeBatchWorld();
  const std::set<std::string> one = {*w.active.begin()};
  FlakyStore flaky(2);
  EXPECT_NO_THROW(RunBatch(w.params, w.snapshot, w.stats, std::span(w.upcoming).first(1), *w.catalog,
                           one, {"v", 0, 3}, &flaky));
  EXPECT_EQ(flaky.calls_, 3);
  FlakyStore dead(100);
  try {
    RunBatch(w.params, w.snapshot, w.stats, w.upcoming, *w.catalog, one, {"v", 0, 3}, &dead);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(*w.active.begin()), std::string::npos);
    EXPECT_NE(std::string(e.what()).find(w.upcoming[0].match_id), std::string::npos);
  }
}

TEST(PayloadTest, SerializeParseRoundTrip) {
  RankingPayload p{"p1", "m1", {{"t2", 1.5f}, {"t1", -0.25f}, {"t9", 3.0e-7f}}, 1700000000, "v7"};
  EXPECT_EQ(RankingPayload::Parse(p.Serialize()), p);
  EXPECT_THROW(RankingPayload::Parse("p1\tm1"), std::exception);
  const RankedSlate fallback = MakeSlate("", "m1", std::vector<std::string>{"a", "b"}, std::vector<double>{1, 2});
  const RankedSlate back = ParseFallback(SerializeFallback(fallback));
  EXPECT_EQ(back.match_id, "m1");
  EXPECT_EQ(back.ranked, fallback.ranked);
}

void Fill(OnlineStore& store, const std::vector<std::pair<std::string, float>>& ranked,
          const std::vector<std::pair<std::string, double>>& fallback = {}) {
  store.Put({"p", "m", ranked, 0, "v1"});
  if (!fallback.empty()) {
    RankedSlate s;
    s.match_id = "m";
    s.ranked = fallback;
    store.PutFallback(s);
  }
}

std::vector<std::string> Ids(const RankResponse& r) {
  std::vector<std::string> out;
  for (const auto& [id, s] : r.contests) out.push_back(id);
  return out;
}

TEST(RankLiveTest, TemplateOrderWithIdTieBreak) {
  OnlineStore store;
  Fill(store, {{"T2", 2.0f}, {"T1", 1.0f}});
  const RankResponse r = RankLive(store, {"p", "m", {{"c1", "T1"}, {"c3", "T2"}, {"c2", "T2"}}});
  EXPECT_EQ(Ids(r), (std::vector<std::string>{"c2", "c3", "c1"}));
  EXPECT_EQ(r.source, RankSource::kPersonalized);
  EXPECT_EQ(r.contests[0].second, 2.0);
}

TEST(RankLiveTest, ColdPlayerUsesFallback) {
  OnlineStore store;
  Fill(store, {{"T2", 2.0f}, {"T1", 1.0f}}, {{"T1", 100.0}, {"T2", 10.0}});
  const RankResponse r = RankLive(store, {"nobody", "m", {{"c2", "T2"}, {"c1", "T1"}}});
  EXPECT_EQ(Ids(r), (std::vector<std::string>{"c1", "c2"}));
  EXPECT_EQ(r.source, RankSource::kFallback);
}

TEST(RankLiveTest, UnknownTemplatesGoAfterKnownByPopularity) {
  OnlineStore store;
  Fill(store, {{"T1", 1.0f}}, {{"T9", 100.0}, {"T8", 10.0}, {"T1", 1.0}});
  const RankResponse r =
      RankLive(store, {"p", "m", {{"x", "Tnew"}, {"a", "T8"}, {"b", "T9"}, {"c", "T1"}}});
  EXPECT_EQ(Ids(r), (std::vector<std::string>{"c", "b", "a", "x"}));
}

TEST(RankLiveTest, ReplacementInstanceTakesSamePlace) {
  OnlineStore store;
  Fill(store, {{"T3", 3.0f}, {"T2", 2.0f}, {"T1", 1.0f}});
  const auto before = Ids(RankLive(store, {"p", "m", {{"c1", "T1"}, {"c2", "T2"}, {"c3", "T3"}}}));
  const auto after = Ids(RankLive(store, {"p", "m", {{"c1", "T1"}, {"c2b", "T2"}, {"c3", "T3"}}}));
  EXPECT_EQ(before, (std::vector<std::string>{"c3", "c2", "c1"}));
  EXPECT_EQ(after, (std::vector<std::string>{"c3", "c2b", "c1"}));
}

TEST(RankLiveTest, RejectsMalformedRequests) {
  OnlineStore store;
  Fill(store, {{"T1", 1.0f}});
  EXPECT_THROW(RankLive(store, {"p", "m", {}}), RequestError);
  EXPECT_THROW(RankLive(store, {"p", "m", {{"c", "T1"}, {"c", "T2"}}}), RequestError);
  EXPECT_THROW(RankLive(store, {"p", "m", {{"", "T1"}}}), RequestError);
  RankRequest big{"p", "m", {}};
  for (int i = 0; i < 3; ++i) big.contests.push_back({"c" + std::to_string(i), "T1"});
  EXPECT_THROW(RankLive(store, big, 2), RequestError);
  EXPECT_THROW(ParseRankRequest("{"), RequestError);
  EXPECT_THROW(ParseRankRequest("[]"), RequestError);
  EXPECT_THROW(ParseRankRequest(R"({"player_id":"p","match_id":"m"})"), RequestError);
  EXPECT_THROW(ParseRankRequest(R"({"player_id":"p","match_id":"m","contests":[{"contest_id":1}]})"),
               RequestError);
}

TEST(RankLiveTest, ResponseIsPermutationOfRequest) {
  Rng rng(31);
  std::vector<std::pair<std::string, float>> ranked;
  for (int t = 0; t < 40; ++t) ranked.emplace_back("T" + std::to_string(t), static_cast<float>(40 - t));
  std::vector<std::pair<std::string, double>> fallback;
  for (int t = 0; t < 60; t += 2) fallback.emplace_back("T" + std::to_string(t), 60.0 - t);
  OnlineStore store;
  Fill(store, ranked, fallback);
  for (int trial = 0; trial < 300; ++trial) {
    RankRequest req{rng.Bernoulli(0.5) ? "p" : "q", "m", {}};
    const int n = 1 + static_cast<int>(rng.Below(80));
    for (int i = 0; i < n; ++i) {
      req.contests.push_back({"c" + std::to_string(i), "T" + std::to_string(rng.Below(70))});
    }
    rng.Shuffle(req.contests);
    const RankResponse r = RankLive(store, req);
    auto got = Ids(r);
    std::vector<std::string> want;
    for (const auto& c : req.contests) want.push_back(c.contest_id);
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    EXPECT_EQ(got, want);
  }
}

TEST(OnlineStoreTest, ConcurrentReadersSeeWholePayloads) {
  OnlineStore store;
  auto make = [](int version) {
    RankingPayload p{"p", "m", {}, version, "v" + std::to_string(version)};
    for (int t = 0; t < 50; ++t) p.ranked.emplace_back("T" + std::to_string(t), static_cast<float>(version));
    return p;
  };
  store.Put(make(0));
  std::atomic<bool> done{false};
  std::atomic<int> mixed{0};
  std::vector<std::thread> readers;
  for (int r = 0; r < 3; ++r) {
    readers.emplace_back([&] {
      while (!done) {
        const auto s = store.Get("p", "m");
        const float first = s->payload.ranked.front().second;
        for (const auto& [t, score] : s->payload.ranked) mixed += score != first;
        mixed += s->payload.model_version != "v" + std::to_string(static_cast<int>(first));
        const RankResponse resp = RankLive(store, {"p", "m", {{"a", "T1"}, {"b", "T2"}}});
        mixed += resp.contests[0].second != resp.contests[1].second;
      }
    });
  }
  for (int v = 1; v <= 2000; ++v) store.Put(make(v));
  done = true;
  for (auto& t : readers) t.join();
  EXPECT_EQ(mixed.load(), 0);
  EXPECT_EQ(store.Get("p", "m")->payload.model_version, "v2000");
  EXPECT_EQ(store.Get("p", "zz"), nullptr);
}

TEST(OnlineStoreTest, LoadsPayloadAndFallbackFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "widir_online_store_test";
  std::filesystem::create_directories(dir);
  const RankingPayload p{"p", "m", {{"T1", 1.0f}}, 5, "v3"};
  std::ofstream(dir / "payloads.tsv") << p.Serialize() << "\n";
  RankedSlate f;
  f.match_id = "m";
  f.ranked = {{"T1", 9.0}};
  std::ofstream(dir / "fallback.tsv") << SerializeFallback(f) << "\n";
  OnlineStore store;
  store.LoadPayloads(dir / "payloads.tsv");
  store.LoadFallbacks(dir / "fallback.tsv");
  EXPECT_EQ(store.Get("p", "m")->payload, p);
  EXPECT_EQ(store.GetFallback("m")->payload.ranked.size(), 1u);
  EXPECT_THROW(store.LoadPayloads(dir / "missing.tsv"), DataError);
  std::filesystem::remove_all(dir);
}

TEST(ServingConfigTest, EnvironmentWins) {
  const auto kv = KeyValueConfig::Parse("port = 9000\nmax_request_bytes = 100\n");
  EXPECT_EQ(ServingConfig::FromKeyValue(kv, false).port, 9000);
  ::setenv("WIDIR_PORT", "9100", 1);
  EXPECT_EQ(ServingConfig::FromKeyValue(kv, true).port, 9100);
  ::unsetenv("WIDIR_PORT");
  EXPECT_THROW(ServingConfig::FromKeyValue(KeyValueConfig::Parse("prot = 1\n"), false), ConfigError);
}

TEST(HttpTest, HealthRankAndSizeLimit) {
  OnlineStore store;
  Fill(store, {{"T2", 2.0f}, {"T1", 1.0f}});
  ServingConfig config;
  config.port = 0;
  config.max_request_bytes = 4096;
  RankingServer server(store, config);
  server.Start();
  httplib::Client client("127.0.0.1", server.port());

  auto health = client.Get("/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  const auto h = nlohmann::json::parse(health->body);
  EXPECT_EQ(h["status"], "ok");
  EXPECT_EQ(h["model_version"], "v1");
  EXPECT_EQ(h["payload_count"], 1);

  const std::string body =
      R"({"player_id":"p","match_id":"m","contests":[{"contest_id":"c1","template_id":"T1"},)"
      R"({"contest_id":"c2","template_id":"T2"}]})";
  auto rank = client.Post("/rank", body, "application/json");
  ASSERT_TRUE(rank);
  EXPECT_EQ(rank->status, 200);
  const auto r = nlohmann::json::parse(rank->body);
  EXPECT_EQ(r["source"], "personalized");
  EXPECT_EQ(r["contests"][0]["contest_id"], "c2");
  EXPECT_EQ(r["contests"][1]["contest_id"], "c1");
  EXPECT_GE(r["served_in_micros"].get<long long>(), 0);

  auto bad = client.Post("/rank", "{\"player_id\":1}", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);

  auto huge = client.Post("/rank", std::string(8192, ' '), "application/json");
  ASSERT_TRUE(huge);
  EXPECT_EQ(huge->status, 413);
  server.Stop();
}

}  // namespace
}  // namespace widir
