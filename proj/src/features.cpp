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

#include "widir/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>

#include "widir/data_io.hpp"
#include "widir/error.hpp"
#include "widir/kv_config.hpp"

namespace widir {
namespace {

constexpr int kLifetimeOffset = 96;
constexpr int kWindowWinRate = 9;
constexpr int kLifetimeWinRate = kLifetimeOffset + 8;
constexpr int kLifetimeMultiEntryRate = kLifetimeOffset + 10;

// Contest columns that are log1p + z-scored; the rest pass through.
constexpr bool kContestZScored[kContestFeatureDims] = {true,  true,  true,  false, false, false,
                                                       false, false, false, false, true};

class RunningStats {
 public:
  explicit RunningStats(std::size_t dims) : n_(0), mean_(dims, 0.0), m2_(dims, 0.0) {}

  template <typename Values>
  void Add(const Values& v) {
    ++n_;
    for (std::size_t i = 0; i < mean_.size(); ++i) {
      const double d = v[i] - mean_[i];
      mean_[i] += d / static_cast<double>(n_);
      m2_[i] += d * (v[i] - mean_[i]);
    }
  }

  ColumnStats Finish() const {
    ColumnStats s;
    s.mean = mean_;
    s.stddev.resize(mean_.size());
    for (std::size_t i = 0; i < mean_.size(); ++i) {
      const double var = n_ > 0 ? m2_[i] / static_cast<double>(n_) : 0.0;
      s.stddev[i] = std::max(std::sqrt(std::max(var, 0.0)), kStddevFloor);
    }
    return s;
  }

 private:
  long long n_;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

float Normalize(double transformed, const ColumnStats& stats, std::size_t column) {
  const double z = (transformed - stats.mean[column]) / stats.stddev[column];
  return static_cast<float>(std::clamp(z, -kFeatureClip, kFeatureClip));
}

template <std::size_t N>
std::array<double, N> TransformPlayer(const std::array<double, N>& raw) {
  std::array<double, N> t{};
  for (std::size_t i = 0; i < N; ++i) {
    t[i] = PlayerColumnIsLogScaled(static_cast<int>(i)) ? std::log1p(raw[i]) : raw[i];
  }
  return t;
}

std::array<double, kContestFeatureDims> TransformContest(
    const std::array<double, kContestFeatureDims>& raw) {
  std::array<double, kContestFeatureDims> t = raw;
  for (int i = 0; i < kContestFeatureDims; ++i) {
    if (kContestZScored[i]) t[i] = std::log1p(raw[i]);
  }
  return t;
}

std::array<double, kInteractionFeatureDims> TransformInteraction(
    const std::array<double, kInteractionFeatureDims>& raw) {
  std::array<double, kInteractionFeatureDims> t{};
  for (int i = 0; i < kInteractionFeatureDims; ++i) t[i] = std::log1p(raw[i]);
  return t;
}

ColumnStats IdentityStats(std::size_t dims) {
  return {std::vector<double>(dims, 0.0), std::vector<double>(dims, 1.0)};
}

std::string JoinDoubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += FormatDouble(v[i]);
  }
  return out;
}

std::vector<double> SplitDoubles(std::string_view text) {
  std::vector<double> out;
  if (text.empty()) return out;
  for (std::string_view f : SplitFields(text, ',')) out.push_back(ParseDouble(f));
  return out;
}

std::string FormatFloat(float v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
  return buf;
}

float ParseFloat(std::string_view text) {
  const std::string s(text);
  char* end = nullptr;
  const float v = std::strtof(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw std::invalid_argument("bad float '" + s + "'");
  return v;
}

std::string SnapshotHeader(Day day) {
  return "#schema\t" + std::string(kFeatureSchemaVersion) + "\tday\t" + FormatDay(day);
}

void CheckSnapshotHeader(std::string_view line, Day day, const std::filesystem::path& path) {
  const auto f = SplitFields(line, '\t');
  if (f.size() != 4 || f[0] != "#schema" || f[2] != "day") {
    throw DataError(path.string() + " (day " + FormatDay(day) + "): missing schema header");
  }
  if (f[1] != kFeatureSchemaVersion) {
    throw DataError(path.string() + " (day " + FormatDay(day) + "): schema version mismatch, got '" +
                    std::string(f[1]) + "', expected '" + std::string(kFeatureSchemaVersion) + "'");
  }
  if (f[3] != FormatDay(day)) {
    throw DataError(path.string() + ": snapshot is for day " + std::string(f[3]) + ", expected " +
                    FormatDay(day));
  }
}

std::vector<std::string_view> Lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    lines.push_back(text.substr(0, nl));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

}  // namespace

int BucketEdges::Bucket(double value) const {
  const auto it = std::upper_bound(edges.begin(), edges.end(), value);
  return std::min(static_cast<int>(it - edges.begin()), kNumBuckets - 1);
}

BucketEdges BucketEdges::FromSample(std::vector<double> sample) {
  BucketEdges b;
  if (sample.empty()) return b;
  std::sort(sample.begin(), sample.end());
  const std::size_t n = sample.size();
  for (int k = 1; k < kNumBuckets; ++k) {
    const double edge = sample[std::min(n - 1, static_cast<std::size_t>(k) * n / kNumBuckets)];
    if (b.edges.empty() || edge > b.edges.back()) b.edges.push_back(edge);
  }
  // A cut at the sample minimum would leave bucket 0 empty.
  if (!b.edges.empty() && b.edges.front() <= sample.front()) b.edges.erase(b.edges.begin());
  return b;
}

std::string NormalizationStats::Serialize() const {
  std::string out;
  auto put = [&out](const std::string& key, const std::vector<double>& v) {
    out += key + " = " + JoinDoubles(v) + "\n";
  };
  put("player.mean", player.mean);
  put("player.stddev", player.stddev);
  put("contest.mean", contest.mean);
  put("contest.stddev", contest.stddev);
  put("interaction.mean", interaction.mean);
  put("interaction.stddev", interaction.stddev);
  put("buckets.entry_fee", entry_fee.edges);
  put("buckets.contest_size", contest_size.edges);
  put("buckets.prize_pool", prize_pool.edges);
  return out;
}

NormalizationStats NormalizationStats::Parse(std::string_view text) {
  const KeyValueConfig kv = KeyValueConfig::Parse(text, "normalization stats");
  NormalizationStats s;
  auto get = [&kv](const std::string& key) {
    if (!kv.Has(key)) throw DataError("normalization stats missing '" + key + "'");
    return SplitDoubles(kv.GetString(key, ""));
  };
  s.player = {get("player.mean"), get("player.stddev")};
  s.contest = {get("contest.mean"), get("contest.stddev")};
  s.interaction = {get("interaction.mean"), get("interaction.stddev")};
  s.entry_fee.edges = get("buckets.entry_fee");
  s.contest_size.edges = get("buckets.contest_size");
  s.prize_pool.edges = get("buckets.prize_pool");
  if (s.player.mean.size() != kPlayerFeatureDims || s.player.stddev.size() != kPlayerFeatureDims ||
      s.contest.mean.size() != kContestFeatureDims ||
      s.contest.stddev.size() != kContestFeatureDims ||
      s.interaction.mean.size() != kInteractionFeatureDims ||
      s.interaction.stddev.size() != kInteractionFeatureDims) {
    throw DataError("normalization stats have wrong dimensions");
  }
  return s;
}

PlayerHistoryIndex::PlayerHistoryIndex(std::span<const JoinRecord> joins,
                                       const ContestCatalog& catalog) {
  for (const JoinRecord& j : joins) {
    const ContestSpec* c = catalog.Find(j.contest_id);
    if (c == nullptr) throw DataError("join references unknown contest " + j.contest_id);
    JoinEvent e;
    e.time = j.joining_time;
    e.day = DayOf(j.joining_time);
    e.template_id = c->template_id;
    e.match_id = j.match_id;
    e.contest_type = c->contest_type;
    e.entry_fee = j.entry_fee_paid.units();
    e.prize_won = j.prize_won.units();
    e.prize_pool = c->prize_money.units();
    e.contest_size = c->contest_size;
    e.multi_entry = c->multi_entry;
    e.guaranteed = c->guaranteed;
    history_[j.player_id].push_back(std::move(e));
  }
  player_ids_.reserve(history_.size());
  for (auto& [player, events] : history_) {
    std::sort(events.begin(), events.end(), [](const JoinEvent& a, const JoinEvent& b) {
      return std::tie(a.time, a.template_id, a.match_id, a.prize_won) <
             std::tie(b.time, b.template_id, b.match_id, b.prize_won);
    });
    player_ids_.push_back(player);
  }
  std::sort(player_ids_.begin(), player_ids_.end());
}

std::span<const JoinEvent> PlayerHistoryIndex::History(std::string_view player_id) const {
  const auto it = history_.find(std::string(player_id));
  if (it == history_.end()) return {};
  return it->second;
}

bool PlayerColumnIsLogScaled(int column) {
  if (column < kLifetimeOffset) return column % kWindowBlockSize != kWindowWinRate;
  return column != kLifetimeWinRate && column != kLifetimeMultiEntryRate;
}

std::array<double, kPlayerFeatureDims> RawPlayerFeatures(std::span<const JoinEvent> history,
                                                         Day as_of_day, const BucketEdges& fee,
                                                         const BucketEdges& size) {
  std::array<double, kPlayerFeatureDims> out{};
  for (std::size_t w = 0; w < kPlayerWindows.size(); ++w) {
    const Day first = as_of_day - kPlayerWindows[w];
    double* block = out.data() + w * kWindowBlockSize;
    std::set<int> types;
    std::set<int> sizes;
    std::set<double> fees;
    std::set<std::string_view> matches;
    double n = 0, fee_sum = 0, fee_max = 0, prize_sum = 0, prize_max = 0, wins = 0;
    double multi = 0, guaranteed = 0;
    for (const JoinEvent& e : history) {
      if (e.day < first || e.day >= as_of_day) continue;
      n += 1;
      types.insert(static_cast<int>(e.contest_type));
      sizes.insert(e.contest_size);
      fees.insert(e.entry_fee);
      matches.insert(e.match_id);
      fee_sum += e.entry_fee;
      fee_max = std::max(fee_max, e.entry_fee);
      prize_sum += e.prize_won;
      prize_max = std::max(prize_max, e.prize_won);
      if (e.prize_won > 0) wins += 1;
      if (e.multi_entry) multi += 1;
      if (e.guaranteed) guaranteed += 1;
      block[13 + static_cast<int>(e.contest_type)] += 1;
      block[16 + fee.Bucket(e.entry_fee)] += 1;
      block[24 + size.Bucket(e.contest_size)] += 1;
    }
    block[0] = n;
    block[1] = static_cast<double>(types.size());
    block[2] = static_cast<double>(sizes.size());
    block[3] = static_cast<double>(fees.size());
    block[4] = n > 0 ? fee_sum / n : 0.0;
    block[5] = fee_max;
    block[6] = n > 0 ? prize_sum / n : 0.0;
    block[7] = prize_max;
    block[8] = fee_sum;
    block[9] = n > 0 ? wins / n : 0.0;
    block[10] = static_cast<double>(matches.size());
    block[11] = multi;
    block[12] = guaranteed;
  }

  double* life = out.data() + kLifetimeOffset;
  std::set<int> types;
  std::set<std::string_view> matches;
  double n = 0, fee_sum = 0, fee_max = 0, prize_sum = 0, prize_max = 0, wins = 0, multi = 0;
  Day last_day = 0;
  bool any = false;
  for (const JoinEvent& e : history) {
    if (e.day >= as_of_day) continue;
    last_day = any ? std::max(last_day, e.day) : e.day;
    any = true;
    n += 1;
    types.insert(static_cast<int>(e.contest_type));
    matches.insert(e.match_id);
    fee_sum += e.entry_fee;
    fee_max = std::max(fee_max, e.entry_fee);
    prize_sum += e.prize_won;
    prize_max = std::max(prize_max, e.prize_won);
    if (e.prize_won > 0) wins += 1;
    if (e.multi_entry) multi += 1;
  }
  life[0] = any ? std::min(static_cast<double>(as_of_day - last_day), kDaysSinceLastJoinCap)
                : kDaysSinceLastJoinCap;
  life[1] = n;
  life[2] = static_cast<double>(types.size());
  life[3] = n > 0 ? fee_sum / n : 0.0;
  life[4] = fee_max;
  life[5] = fee_sum;
  life[6] = n > 0 ? prize_sum / n : 0.0;
  life[7] = prize_max;
  life[8] = n > 0 ? wins / n : 0.0;
  life[9] = static_cast<double>(matches.size());
  life[10] = n > 0 ? multi / n : 0.0;
  return out;
}

std::array<double, kContestFeatureDims> RawContestFeatures(const ContestSpec& spec) {
  const std::vector<std::string> violations = ValidateContest(spec);
  if (!violations.empty()) {
    throw std::invalid_argument("invalid contest " + spec.contest_id + ": " + violations.front());
  }
  std::array<double, kContestFeatureDims> out{};
  out[0] = spec.entry_fee.units();
  out[1] = spec.prize_money.units();
  out[2] = static_cast<double>(spec.contest_size);
  out[3 + static_cast<int>(spec.contest_type)] = 1.0;
  out[6] = spec.guaranteed ? 1.0 : 0.0;
  out[7] = spec.multi_entry ? 1.0 : 0.0;
  if (spec.prize_money > Money()) {
    const PrizeStats ps =
        ComputePrizeStats(spec.prize_distribution, spec.contest_size, spec.prize_money);
    out[8] = ps.top_prize_fraction;
    out[9] = ps.winner_fraction;
  }
  out[10] = spec.prize_money.units() / std::max(spec.entry_fee.units(), 0.01);
  return out;
}

std::vector<RecentJoin> SummarizeRecent(std::span<const JoinEvent> history, Day as_of_day,
                                        const NormalizationStats& stats) {
  std::vector<RecentJoin> recent;
  for (const JoinEvent& e : history) {
    if (e.day < as_of_day - kInteractionLongWindow || e.day >= as_of_day) continue;
    RecentJoin r;
    r.day = e.day;
    r.contest_type = e.contest_type;
    r.fee_bucket = stats.entry_fee.Bucket(e.entry_fee);
    r.prize_bucket = stats.prize_pool.Bucket(e.prize_pool);
    r.size_bucket = stats.contest_size.Bucket(e.contest_size);
    r.template_id = e.template_id;
    recent.push_back(std::move(r));
  }
  return recent;
}

std::array<double, kInteractionFeatureDims> RawInteractionFeatures(
    std::span<const RecentJoin> recent, const ContestSpec& target, Day as_of_day,
    const NormalizationStats& stats) {
  const int fee_bucket = stats.entry_fee.Bucket(target.entry_fee.units());
  const int prize_bucket = stats.prize_pool.Bucket(target.prize_money.units());
  const int size_bucket = stats.contest_size.Bucket(target.contest_size);
  std::array<double, kInteractionFeatureDims> out{};
  for (const RecentJoin& r : recent) {
    if (r.day >= as_of_day || r.day < as_of_day - kInteractionLongWindow) continue;
    const bool yesterday = r.day == as_of_day - 1;
    const double hits[4] = {r.contest_type == target.contest_type ? 1.0 : 0.0,
                            r.fee_bucket == fee_bucket ? 1.0 : 0.0,
                            r.prize_bucket == prize_bucket ? 1.0 : 0.0,
                            r.size_bucket == size_bucket ? 1.0 : 0.0};
    for (int k = 0; k < 4; ++k) {
      if (yesterday) out[k] += hits[k];
      out[4 + k] += hits[k];
    }
    if (r.template_id == target.template_id) out[8] += 1.0;
  }
  return out;
}

NormalizationStats FitNormalization(std::span<const JoinRecord> train_joins,
                                    const ContestCatalog& catalog) {
  if (train_joins.empty()) throw std::invalid_argument("empty training partition");
  std::vector<double> fees, sizes, pools;
  fees.reserve(train_joins.size());
  sizes.reserve(train_joins.size());
  pools.reserve(train_joins.size());
  for (const JoinRecord& j : train_joins) {
    const ContestSpec* c = catalog.Find(j.contest_id);
    if (c == nullptr) throw DataError("join references unknown contest " + j.contest_id);
    fees.push_back(c->entry_fee.units());
    sizes.push_back(static_cast<double>(c->contest_size));
    pools.push_back(c->prize_money.units());
  }
  NormalizationStats stats;
  stats.entry_fee = BucketEdges::FromSample(std::move(fees));
  stats.contest_size = BucketEdges::FromSample(std::move(sizes));
  stats.prize_pool = BucketEdges::FromSample(std::move(pools));

  const PlayerHistoryIndex index(train_joins, catalog);
  RunningStats player(kPlayerFeatureDims);
  RunningStats contest(kContestFeatureDims);
  RunningStats interaction(kInteractionFeatureDims);
  for (const std::string& player_id : index.players()) {
    const std::span<const JoinEvent> history = index.History(player_id);
    Day previous = 0;
    bool first = true;
    std::vector<RecentJoin> recent;
    for (const JoinEvent& e : history) {
      if (first || e.day != previous) {
        player.Add(TransformPlayer(
            RawPlayerFeatures(history, e.day, stats.entry_fee, stats.contest_size)));
        recent = SummarizeRecent(history, e.day, stats);
        previous = e.day;
        first = false;
      }
      const ContestSpec& target = catalog.Template(e.template_id);
      contest.Add(TransformContest(RawContestFeatures(target)));
      interaction.Add(TransformInteraction(RawInteractionFeatures(recent, target, e.day, stats)));
    }
  }
  stats.player = player.Finish();
  stats.contest = contest.Finish();
  for (int i = 0; i < kContestFeatureDims; ++i) {
    if (!kContestZScored[i]) {
      stats.contest.mean[i] = 0.0;
      stats.contest.stddev[i] = 1.0;
    }
  }
  stats.interaction = interaction.Finish();
  return stats;
}

std::vector<float> PlayerFeatures(std::span<const JoinEvent> history, Day as_of_day,
                                  const NormalizationStats& stats) {
  const auto t =
      TransformPlayer(RawPlayerFeatures(history, as_of_day, stats.entry_fee, stats.contest_size));
  std::vector<float> out(kPlayerFeatureDims);
  for (int i = 0; i < kPlayerFeatureDims; ++i) out[i] = Normalize(t[i], stats.player, i);
  return out;
}

std::vector<float> ColdStartPlayerFeatures(Day as_of_day, const NormalizationStats& stats) {
  return PlayerFeatures({}, as_of_day, stats);
}

std::vector<float> ContestFeatures(const ContestSpec& spec, const NormalizationStats& stats) {
  const auto t = TransformContest(RawContestFeatures(spec));
  std::vector<float> out(kContestFeatureDims);
  for (int i = 0; i < kContestFeatureDims; ++i) out[i] = Normalize(t[i], stats.contest, i);
  return out;
}

std::vector<float> InteractionFeatures(std::span<const RecentJoin> recent, const ContestSpec& target,
                                       Day as_of_day, const NormalizationStats& stats) {
  const auto t = TransformInteraction(RawInteractionFeatures(recent, target, as_of_day, stats));
  std::vector<float> out(kInteractionFeatureDims);
  for (int i = 0; i < kInteractionFeatureDims; ++i) out[i] = Normalize(t[i], stats.interaction, i);
  return out;
}

const PlayerRow* FeatureSnapshot::Find(std::string_view player_id) const {
  const auto it = players.find(std::string(player_id));
  return it == players.end() ? nullptr : &it->second;
}

FeatureSnapshot BuildSnapshot(const PlayerHistoryIndex& history, Day day,
                              const NormalizationStats& stats) {
  FeatureSnapshot snapshot;
  snapshot.as_of_day = day;
  for (const std::string& player_id : history.players()) {
    const std::span<const JoinEvent> events = history.History(player_id);
    const bool active = std::any_of(events.begin(), events.end(), [day](const JoinEvent& e) {
      return e.day < day && e.day >= day - kActiveWindowDays;
    });
    if (!active) continue;
    PlayerRow row;
    row.features = PlayerFeatures(events, day, stats);
    row.recent = SummarizeRecent(events, day, stats);
    snapshot.players.emplace(player_id, std::move(row));
  }
  return snapshot;
}

FeatureTriple MakeTriple(const FeatureSnapshot& snapshot, std::string_view player_id,
                         const ContestSpec& target, const NormalizationStats& stats) {
  FeatureTriple t;
  const PlayerRow* row = snapshot.Find(player_id);
  t.player = row != nullptr ? row->features : ColdStartPlayerFeatures(snapshot.as_of_day, stats);
  t.contest = ContestFeatures(target, stats);
  t.interaction = row != nullptr
                      ? InteractionFeatures(row->recent, target, snapshot.as_of_day, stats)
                      : InteractionFeatures({}, target, snapshot.as_of_day, stats);
  return t;
}

std::filesystem::path OfflineFeatureStore::DayDirectory(Day day) const {
  return root_ / ("day=" + FormatDay(day));
}

void OfflineFeatureStore::WriteManifest(const NormalizationStats& stats) const {
  std::string text = "schema_version = " + std::string(kFeatureSchemaVersion) + "\n";
  text += "d_p = " + std::to_string(kPlayerFeatureDims) + "\n";
  text += "d_c = " + std::to_string(kContestFeatureDims) + "\n";
  text += "d_i = " + std::to_string(kInteractionFeatureDims) + "\n";
  text += stats.Serialize();
  WriteFileAtomic(root_ / "manifest.txt", text);
}

NormalizationStats OfflineFeatureStore::ReadManifest() const {
  const std::filesystem::path path = root_ / "manifest.txt";
  const std::string text = ReadFile(path);
  const KeyValueConfig kv = KeyValueConfig::Parse(text, path.string());
  const std::string version = kv.GetString("schema_version", "");
  if (version != kFeatureSchemaVersion) {
    throw DataError(path.string() + ": schema version mismatch, got '" + version + "', expected '" +
                    std::string(kFeatureSchemaVersion) + "'");
  }
  if (kv.GetInt("d_p", -1) != kPlayerFeatureDims || kv.GetInt("d_c", -1) != kContestFeatureDims ||
      kv.GetInt("d_i", -1) != kInteractionFeatureDims) {
    throw DataError(path.string() + ": feature dimensions do not match this build");
  }
  std::string stats_text;
  for (const auto& [key, value] : kv.values()) {
    if (key.find('.') != std::string::npos) stats_text += key + " = " + value + "\n";
  }
  return NormalizationStats::Parse(stats_text);
}

void OfflineFeatureStore::Write(const FeatureSnapshot& snapshot) const {
  const std::filesystem::path dir = DayDirectory(snapshot.as_of_day);
  try {
    std::string players = SnapshotHeader(snapshot.as_of_day) + "\n";
    std::string recent = SnapshotHeader(snapshot.as_of_day) + "\n";
    for (const auto& [player_id, row] : snapshot.players) {
      players += player_id;
      for (float v : row.features) {
        players += '\t';
        players += FormatFloat(v);
      }
      players += '\n';
      for (const RecentJoin& r : row.recent) {
        recent += player_id + '\t' + FormatDay(r.day) + '\t' +
                  std::string(ContestTypeName(r.contest_type)) + '\t' +
                  std::to_string(r.fee_bucket) + '\t' + std::to_string(r.prize_bucket) + '\t' +
                  std::to_string(r.size_bucket) + '\t' + r.template_id + '\n';
      }
    }
    WriteFileAtomic(dir / "players.tsv", players);
    WriteFileAtomic(dir / "recent.tsv", recent);
  } catch (const std::exception& e) {
    throw DataError("feature store write failed for day " + FormatDay(snapshot.as_of_day) + " at " +
                    dir.string() + ": " + e.what());
  }
}

FeatureSnapshot OfflineFeatureStore::Read(Day day) const {
  const std::filesystem::path dir = DayDirectory(day);
  if (!std::filesystem::exists(dir)) {
    throw DataError("no feature snapshot for day " + FormatDay(day) + " at " + dir.string());
  }
  FeatureSnapshot snapshot;
  snapshot.as_of_day = day;
  const std::filesystem::path players_path = dir / "players.tsv";
  const std::string players_text = ReadFile(players_path);
  const auto player_lines = Lines(players_text);
  if (player_lines.empty()) throw DataError(players_path.string() + ": empty snapshot file");
  CheckSnapshotHeader(player_lines[0], day, players_path);
  try {
    for (std::size_t i = 1; i < player_lines.size(); ++i) {
      if (player_lines[i].empty()) continue;
      const auto f = SplitFields(player_lines[i], '\t');
      if (f.size() != kPlayerFeatureDims + 1) {
        throw std::invalid_argument("expected " + std::to_string(kPlayerFeatureDims + 1) + " fields");
      }
      PlayerRow row;
      row.features.reserve(kPlayerFeatureDims);
      for (std::size_t k = 1; k < f.size(); ++k) row.features.push_back(ParseFloat(f[k]));
      snapshot.players.emplace(std::string(f[0]), std::move(row));
    }
  } catch (const std::invalid_argument& e) {
    throw DataError(players_path.string() + " (day " + FormatDay(day) + "): " + e.what());
  }
  const std::filesystem::path recent_path = dir / "recent.tsv";
  const std::string recent_text = ReadFile(recent_path);
  const auto recent_lines = Lines(recent_text);
  if (recent_lines.empty()) throw DataError(recent_path.string() + ": empty snapshot file");
  CheckSnapshotHeader(recent_lines[0], day, recent_path);
  try {
    for (std::size_t i = 1; i < recent_lines.size(); ++i) {
      if (recent_lines[i].empty()) continue;
      const auto f = SplitFields(recent_lines[i], '\t');
      if (f.size() != 7) throw std::invalid_argument("expected 7 fields");
      auto it = snapshot.players.find(std::string(f[0]));
      if (it == snapshot.players.end()) {
        throw std::invalid_argument("recent join for player without a feature row");
      }
      RecentJoin r;
      r.day = ParseDay(f[1]);
      r.contest_type = ParseContestType(f[2]);
      r.fee_bucket = static_cast<int>(ParseInt(f[3]));
      r.prize_bucket = static_cast<int>(ParseInt(f[4]));
      r.size_bucket = static_cast<int>(ParseInt(f[5]));
      r.template_id = f[6];
      it->second.recent.push_back(std::move(r));
    }
  } catch (const std::invalid_argument& e) {
    throw DataError(recent_path.string() + " (day " + FormatDay(day) + "): " + e.what());
  }
  return snapshot;
}

bool OfflineFeatureStore::Contains(Day day) const {
  return std::filesystem::exists(DayDirectory(day) / "players.tsv");
}

std::vector<Day> OfflineFeatureStore::Days() const {
  std::vector<Day> days;
  if (!std::filesystem::exists(root_)) return days;
  for (const auto& entry : std::filesystem::directory_iterator(root_)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_directory() && name.rfind("day=", 0) == 0) days.push_back(ParseDay(name.substr(4)));
  }
  std::sort(days.begin(), days.end());
  return days;
}

ComputedSnapshots::ComputedSnapshots(std::shared_ptr<const PlayerHistoryIndex> history,
                                     NormalizationStats stats, std::size_t cache_size)
    : history_(std::move(history)), stats_(std::move(stats)), cache_size_(std::max<std::size_t>(cache_size, 1)) {}

const FeatureSnapshot& ComputedSnapshots::Get(Day day) {
  for (const auto& s : cache_) {
    if (s->as_of_day == day) return *s;
  }
  if (cache_.size() >= cache_size_) cache_.erase(cache_.begin());
  cache_.push_back(std::make_unique<FeatureSnapshot>(BuildSnapshot(*history_, day, stats_)));
  return *cache_.back();
}

StoredSnapshots::StoredSnapshots(OfflineFeatureStore store, std::size_t cache_size)
    : store_(std::move(store)), cache_size_(std::max<std::size_t>(cache_size, 1)) {}

const FeatureSnapshot& StoredSnapshots::Get(Day day) {
  for (const auto& s : cache_) {
    if (s->as_of_day == day) return *s;
  }
  if (cache_.size() >= cache_size_) cache_.erase(cache_.begin());
  cache_.push_back(std::make_unique<FeatureSnapshot>(store_.Read(day)));
  return *cache_.back();
}

}  // namespace widir
