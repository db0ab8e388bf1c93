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

#include "widir/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "widir/error.hpp"
#include "widir/random.hpp"

namespace widir {
namespace {

constexpr std::uint64_t kPadTag = 0x70ad;
constexpr std::uint64_t kPairTag = 0x9a17;
constexpr std::uint64_t kInitTag = 0x1417;
constexpr std::uint64_t kEpochTag = 0xe90c;

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

std::size_t PairCount(std::span<const ListExample> lists) {
  std::size_t n = 0;
  for (const ListExample& e : lists) n += e.pairs.size();
  return n;
}

// Forwards one list, accumulates the gradient of its summed pair losses and
// returns that sum. Each item is scored once; a pair's hinge subgradient is
// routed to its two scores.
double ListGradient(const WidirParams& params, const ListExample& ex, ForwardTrace<float>& trace,
                    WidirParams& grad) {
  if (ex.pairs.empty()) return 0.0;
  Forward(params, ScoringInput{ex.player, ex.contests, ex.interactions, ex.size()}, trace);
  std::vector<float> score_grad(ex.size(), 0.0f);
  double loss = 0.0;
  bool any = false;
  for (const auto& [pos, neg] : ex.pairs) {
    const float l = HingeLoss(trace.scores[pos], trace.scores[neg]);
    if (l > 0.0f) {
      loss += l;
      score_grad[pos] -= 1.0f;
      score_grad[neg] += 1.0f;
      any = true;
    }
  }
  if (any) Backward(params, trace, std::span<const float>(score_grad), grad);
  return loss;
}

double ListLoss(const WidirParams& params, const ListExample& ex) {
  if (ex.pairs.empty()) return 0.0;
  const std::vector<float> scores =
      ScoreBatch(params, ScoringInput{ex.player, ex.contests, ex.interactions, ex.size()});
  double loss = 0.0;
  for (const auto& [pos, neg] : ex.pairs) loss += HingeLoss(scores[pos], scores[neg]);
  return loss;
}

}  // namespace

TrainConfig TrainConfig::FromKeyValue(const KeyValueConfig& kv) {
  kv.RequireKnownKeys({"learning_rate", "epochs", "batch_size", "validation_batch_size",
                       "early_stopping_rounds", "list_length", "max_pairs_per_list", "optimizer",
                       "adam_beta1", "adam_beta2", "adam_epsilon", "seed"});
  TrainConfig c;
  c.learning_rate = kv.GetDouble("learning_rate", c.learning_rate);
  c.epochs = static_cast<int>(kv.GetInt("epochs", c.epochs));
  c.batch_size = static_cast<int>(kv.GetInt("batch_size", c.batch_size));
  c.validation_batch_size =
      static_cast<int>(kv.GetInt("validation_batch_size", c.validation_batch_size));
  c.early_stopping_rounds =
      static_cast<int>(kv.GetInt("early_stopping_rounds", c.early_stopping_rounds));
  c.list_length = static_cast<int>(kv.GetInt("list_length", c.list_length));
  c.max_pairs_per_list = static_cast<int>(kv.GetInt("max_pairs_per_list", c.max_pairs_per_list));
  const std::string opt = kv.GetString("optimizer", "adam");
  if (opt == "adam") {
    c.optimizer = OptimizerKind::kAdam;
  } else if (opt == "sgd") {
    c.optimizer = OptimizerKind::kSgd;
  } else {
    throw ConfigError("key 'optimizer': expected adam or sgd, got '" + opt + "'");
  }
  c.adam_beta1 = kv.GetDouble("adam_beta1", c.adam_beta1);
  c.adam_beta2 = kv.GetDouble("adam_beta2", c.adam_beta2);
  c.adam_epsilon = kv.GetDouble("adam_epsilon", c.adam_epsilon);
  const long long seed = kv.GetInt("seed", static_cast<long long>(c.seed));
  if (seed < 0) throw ConfigError("key 'seed': must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);
  c.Validate();
  return c;
}

KeyValueConfig TrainConfig::ToKeyValue() const {
  KeyValueConfig kv;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  kv.Set("learning_rate", num(learning_rate));
  kv.Set("epochs", std::to_string(epochs));
  kv.Set("batch_size", std::to_string(batch_size));
  kv.Set("validation_batch_size", std::to_string(validation_batch_size));
  kv.Set("early_stopping_rounds", std::to_string(early_stopping_rounds));
  kv.Set("list_length", std::to_string(list_length));
  kv.Set("max_pairs_per_list", std::to_string(max_pairs_per_list));
  kv.Set("optimizer", optimizer == OptimizerKind::kAdam ? "adam" : "sgd");
  kv.Set("adam_beta1", num(adam_beta1));
  kv.Set("adam_beta2", num(adam_beta2));
  kv.Set("adam_epsilon", num(adam_epsilon));
  kv.Set("seed", std::to_string(seed));
  return kv;
}

void TrainConfig::Validate() const {
  auto positive = [](const char* key, double v) {
    if (!(v > 0)) throw ConfigError(std::string("key '") + key + "': must be > 0");
  };
  positive("learning_rate", learning_rate);
  positive("epochs", epochs);
  positive("batch_size", batch_size);
  positive("validation_batch_size", validation_batch_size);
  positive("early_stopping_rounds", early_stopping_rounds);
  if (list_length != 50 && list_length != 100 && list_length != 200) {
    throw ConfigError("key 'list_length': supported values are 50, 100, 200");
  }
  if (max_pairs_per_list < 0) throw ConfigError("key 'max_pairs_per_list': must be >= 0");
  if (!(adam_beta1 >= 0 && adam_beta1 < 1)) throw ConfigError("key 'adam_beta1': not in [0, 1)");
  if (!(adam_beta2 >= 0 && adam_beta2 < 1)) throw ConfigError("key 'adam_beta2': not in [0, 1)");
  positive("adam_epsilon", adam_epsilon);
}

std::vector<OrderedContestList> BuildOrderedLists(std::span<const JoinRecord> joins,
                                                  const ContestCatalog& catalog,
                                                  std::span<const MatchRecord> matches,
                                                  int list_length, std::uint64_t seed) {
  if (list_length <= 0) throw std::invalid_argument("list_length must be positive");
  std::unordered_map<std::string, Timestamp> starts;
  for (const MatchRecord& m : matches) starts[m.match_id] = m.start_time;

  std::map<std::pair<std::string, std::string>, std::map<std::string, int>> counts;
  for (const JoinRecord& j : joins) {
    const ContestSpec* spec = catalog.Find(j.contest_id);
    if (spec == nullptr) throw DataError("join references unknown contest " + j.contest_id);
    ++counts[{j.match_id, j.player_id}][spec->template_id];
  }

  std::vector<OrderedContestList> lists;
  lists.reserve(counts.size());
  const std::size_t length = static_cast<std::size_t>(list_length);
  for (const auto& [key, per_template] : counts) {
    OrderedContestList list;
    list.match_id = key.first;
    list.player_id = key.second;
    const auto start = starts.find(list.match_id);
    if (start == starts.end()) throw DataError("join references unknown match " + list.match_id);
    list.match_start = start->second;

    for (const auto& [tid, n] : per_template) list.entries.push_back({tid, n});
    std::stable_sort(list.entries.begin(), list.entries.end(),
                     [](const ListEntry& a, const ListEntry& b) {
                       if (a.join_count != b.join_count) return a.join_count > b.join_count;
                       return a.template_id < b.template_id;
                     });
    if (list.entries.size() > length) list.entries.resize(length);
    list.joined_count = static_cast<int>(list.entries.size());

    if (list.entries.size() < length) {
      std::vector<std::string> candidates;
      for (const std::string& tid : catalog.MatchTemplates(list.match_id)) {
        if (!per_template.contains(tid)) candidates.push_back(tid);
      }
      const std::size_t need = length - list.entries.size();
      Rng rng(DeriveSeed(seed, {kPadTag, HashString(list.player_id), HashString(list.match_id)}));
      for (std::size_t idx : rng.SampleWithoutReplacement(candidates.size(), need)) {
        list.entries.push_back({candidates[idx], 0});
      }
      list.short_list = list.entries.size() < length;
    }
    lists.push_back(std::move(list));
  }
  return lists;
}

std::vector<PreferencePair> BuildPairs(const OrderedContestList& list, std::size_t max_pairs,
                                       std::uint64_t seed) {
  std::vector<PreferencePair> pairs;
  const auto& e = list.entries;
  auto emit = [&](std::size_t pos, std::size_t neg) {
    pairs.push_back({list.player_id, list.match_id, e[pos].template_id, e[neg].template_id,
                     static_cast<int>(pos), static_cast<int>(neg)});
  };
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t j = i + 1; j < e.size(); ++j) {
      if (e[i].join_count > e[j].join_count) {
        emit(i, j);
      } else if (e[j].join_count > e[i].join_count) {
        emit(j, i);
      }
    }
  }
  if (max_pairs > 0 && pairs.size() > max_pairs) {
    Rng rng(DeriveSeed(seed, {kPairTag, HashString(list.player_id), HashString(list.match_id)}));
    std::vector<std::size_t> keep = rng.SampleWithoutReplacement(pairs.size(), max_pairs);
    std::sort(keep.begin(), keep.end());
    std::vector<PreferencePair> sub;
    sub.reserve(keep.size());
    for (std::size_t k : keep) sub.push_back(std::move(pairs[k]));
    pairs = std::move(sub);
  }
  return pairs;
}

std::vector<ListExample> MaterializeExamples(std::span<const OrderedContestList> lists,
                                             const ContestCatalog& catalog,
                                             const NormalizationStats& stats,
                                             SnapshotSource& snapshots, std::size_t max_pairs,
                                             std::uint64_t seed) {
  std::vector<ListExample> out(lists.size());
  // Visit lists grouped by day so each snapshot is fetched once.
  std::vector<std::size_t> order(lists.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return FeatureDayForMatch(lists[a].match_start) < FeatureDayForMatch(lists[b].match_start);
  });
  std::unordered_map<std::string, std::vector<float>> contest_cache;
  for (std::size_t idx : order) {
    const OrderedContestList& list = lists[idx];
    if (list.entries.size() > 65535) throw DataError("ordered list too long");
    const Day day = FeatureDayForMatch(list.match_start);
    const FeatureSnapshot& snapshot = snapshots.Get(day);
    ListExample& ex = out[idx];
    ex.player_id = list.player_id;
    ex.match_id = list.match_id;
    static const std::vector<RecentJoin> kNoRecent;
    const PlayerRow* row = snapshot.Find(list.player_id);
    ex.player = row != nullptr ? row->features : ColdStartPlayerFeatures(day, stats);
    const std::vector<RecentJoin>& recent = row != nullptr ? row->recent : kNoRecent;
    for (const ListEntry& entry : list.entries) {
      const ContestSpec& spec = catalog.Template(entry.template_id);
      auto cached = contest_cache.find(entry.template_id);
      if (cached == contest_cache.end()) {
        cached = contest_cache.emplace(entry.template_id, ContestFeatures(spec, stats)).first;
      }
      ex.contests.insert(ex.contests.end(), cached->second.begin(), cached->second.end());
      const std::vector<float> inter = InteractionFeatures(recent, spec, day, stats);
      ex.interactions.insert(ex.interactions.end(), inter.begin(), inter.end());
      ex.join_counts.push_back(entry.join_count);
    }
    for (const PreferencePair& p : BuildPairs(list, max_pairs, seed)) {
      ex.pairs.emplace_back(static_cast<std::uint16_t>(p.pos_index),
                            static_cast<std::uint16_t>(p.neg_index));
    }
  }
  return out;
}

std::string TrainReport::Serialize() const {
  std::string out;
  char buf[160];
  for (const EpochRecord& r : epochs) {
    std::snprintf(buf, sizeof buf, "%d %.9g %.9g %.3f\n", r.epoch, r.train_loss, r.valid_loss,
                  r.seconds);
    out += buf;
  }
  return out;
}

bool EarlyStopping::Update(int epoch, double loss) {
  if (best_epoch_ < 0 || loss < best_loss_) {
    best_epoch_ = epoch;
    best_loss_ = loss;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

TrainReport RunTrainingLoop(const TrainConfig& config, WidirParams& params,
                            const std::function<double()>& initial_train_loss,
                            const std::function<double(int epoch)>& run_epoch,
                            const std::function<double()>& validate) {
  const auto t0 = std::chrono::steady_clock::now();
  TrainReport report;
  EarlyStopping stopping(config.early_stopping_rounds);
  WidirParams best = params;

  auto t = std::chrono::steady_clock::now();
  EpochRecord first{0, initial_train_loss(), validate(), 0.0};
  first.seconds = Seconds(t);
  report.epochs.push_back(first);
  stopping.Update(0, first.valid_loss);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    t = std::chrono::steady_clock::now();
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = run_epoch(epoch);
    rec.valid_loss = validate();
    rec.seconds = Seconds(t);
    report.epochs.push_back(rec);
    if (stopping.Update(epoch, rec.valid_loss)) best = params;
    if (stopping.ShouldStop()) {
      report.stopped_early = true;
      break;
    }
  }
  params = std::move(best);
  report.best_epoch = stopping.best_epoch();
  report.best_valid_loss = stopping.best_loss();
  report.wall_seconds = Seconds(t0);
  return report;
}

double MeanPairLoss(const WidirParams& params, std::span<const ListExample> lists) {
  const std::size_t pairs = PairCount(lists);
  if (pairs == 0) throw DataError("empty pair stream");
  double loss = 0.0;
  for (const ListExample& ex : lists) loss += ListLoss(params, ex);
  return loss / static_cast<double>(pairs);
}

Optimizer::Optimizer(const TrainConfig& config, const WidirParams& shape)
    : kind_(config.optimizer),
      lr_(config.learning_rate),
      beta1_(config.adam_beta1),
      beta2_(config.adam_beta2),
      eps_(config.adam_epsilon) {
  if (kind_ == OptimizerKind::kAdam) {
    m_.assign(shape.Count(), 0.0f);
    v_.assign(shape.Count(), 0.0f);
  }
}

void Optimizer::Step(WidirParams& params, const WidirParams& grad) {
  std::vector<float> g;
  g.reserve(params.Count());
  grad.ForEach([&](float v) { g.push_back(v); });
  if (g.size() != params.Count()) throw DimensionError("gradient shape mismatch");
  ++step_;
  std::size_t i = 0;
  if (kind_ == OptimizerKind::kSgd) {
    params.ForEach([&](float& p) { p = static_cast<float>(p - lr_ * g[i++]); });
    return;
  }
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  params.ForEach([&](float& p) {
    const double gi = g[i];
    const double m = beta1_ * m_[i] + (1.0 - beta1_) * gi;
    const double v = beta2_ * v_[i] + (1.0 - beta2_) * gi * gi;
    m_[i] = static_cast<float>(m);
    v_[i] = static_cast<float>(v);
    p = static_cast<float>(p - lr_ * (m / c1) / (std::sqrt(v / c2) + eps_));
    ++i;
  });
}

TrainResult Train(const TrainConfig& config, std::span<const ListExample> train,
                  std::span<const ListExample> valid, const WidirDims& dims) {
  config.Validate();
  if (PairCount(train) == 0) throw DataError("empty pair stream: no training pairs");
  if (PairCount(valid) == 0) throw DataError("empty pair stream: no validation pairs");
  for (const auto* set : {&train, &valid}) {
    for (const ListExample& ex : *set) {
      if (ex.player.size() != static_cast<std::size_t>(dims.player)) {
        throw DimensionError("player feature length " + std::to_string(ex.player.size()) +
                             " does not match d_p = " + std::to_string(dims.player));
      }
    }
  }

  TrainResult result{InitParams<float>(dims, DeriveSeed(config.seed, {kInitTag})), {}};
  WidirParams& params = result.params;
  Optimizer optimizer(config, params);
  WidirParams grad = ZeroParams<float>(dims);
  ForwardTrace<float> trace;

  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (!train[i].pairs.empty()) active.push_back(i);
  }
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);

  auto run_epoch = [&](int epoch) {
    std::vector<std::size_t> order = active;
    Rng rng(DeriveSeed(config.seed, {kEpochTag, static_cast<std::uint64_t>(epoch)}));
    rng.Shuffle(order);
    double total_loss = 0.0;
    std::size_t total_pairs = 0;
    std::size_t pos = 0;
    while (pos < order.size()) {
      grad.SetZero();
      std::size_t in_batch = 0;
      while (pos < order.size() && in_batch < batch) {
        const ListExample& ex = train[order[pos++]];
        total_loss += ListGradient(params, ex, trace, grad);
        in_batch += ex.pairs.size();
      }
      const float scale = 1.0f / static_cast<float>(in_batch);
      grad.ForEach([&](float& g) { g *= scale; });
      optimizer.Step(params, grad);
      total_pairs += in_batch;
    }
    return total_loss / static_cast<double>(total_pairs);
  };
  result.report = RunTrainingLoop(
      config, params, [&] { return MeanPairLoss(params, train); }, run_epoch,
      [&] { return MeanPairLoss(params, valid); });
  return result;
}

}  // namespace widir
