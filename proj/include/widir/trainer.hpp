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

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "widir/domain.hpp"
#include "widir/features.hpp"
#include "widir/kv_config.hpp"
#include "widir/model.hpp"

namespace widir {

struct ListEntry {
  std::string template_id;
  int join_count = 0;

  bool operator==(const ListEntry&) const = default;
};

struct OrderedContestList {
  std::string player_id;
  std::string match_id;
  Timestamp match_start = 0;
  std::vector<ListEntry> entries;
  int joined_count = 0;
  // Set when the match had too few templates to reach the list length.
  bool short_list = false;

  bool operator==(const OrderedContestList&) const = default;
};

struct PreferencePair {
  std::string player_id;
  std::string match_id;
  std::string pos_template_id;
  std::string neg_template_id;
  int pos_index = 0;
  int neg_index = 0;

  bool operator==(const PreferencePair&) const = default;
};

enum class OptimizerKind { kAdam, kSgd };

struct TrainConfig {
  double learning_rate = 0.001;
  int epochs = 100;
  int batch_size = 4096;
  int validation_batch_size = 16384;
  int early_stopping_rounds = 15;
  int list_length = 100;
  // 0 disables the cap.
  int max_pairs_per_list = 256;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 1;

  static TrainConfig FromKeyValue(const KeyValueConfig& kv);
  KeyValueConfig ToKeyValue() const;
  void Validate() const;
};

// One list per (player, match) with at least one join, sorted by
// (match_id, player_id). Padding draws are seeded per (seed, player, match).
std::vector<OrderedContestList> BuildOrderedLists(std::span<const JoinRecord> joins,
                                                  const ContestCatalog& catalog,
                                                  std::span<const MatchRecord> matches,
                                                  int list_length, std::uint64_t seed);

// Strict-preference pairs in (i, j) position order; subsampled uniformly to
// `max_pairs` when larger (0 = no cap).
std::vector<PreferencePair> BuildPairs(const OrderedContestList& list, std::size_t max_pairs,
                                       std::uint64_t seed);

// A list with every feature materialized.
struct ListExample {
  std::string player_id;
  std::string match_id;
  std::vector<float> player;        // d_p
  std::vector<float> contests;      // n x d_c
  std::vector<float> interactions;  // n x d_i
  std::vector<int> join_counts;
  std::vector<std::pair<std::uint16_t, std::uint16_t>> pairs;

  std::size_t size() const { return join_counts.size(); }
};

// Features are taken from the snapshot of the match's start day.
std::vector<ListExample> MaterializeExamples(std::span<const OrderedContestList> lists,
                                             const ContestCatalog& catalog,
                                             const NormalizationStats& stats,
                                             SnapshotSource& snapshots, std::size_t max_pairs,
                                             std::uint64_t seed);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_valid_loss = 0.0;
  bool stopped_early = false;
  double wall_seconds = 0.0;

  // One "epoch train_loss valid_loss seconds" record per line.
  std::string Serialize() const;
};

// Tracks the best validation loss; stops after `patience` consecutive epochs
// without a strict improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  // Returns true when `loss` is a new best.
  bool Update(int epoch, double loss);
  bool ShouldStop() const { return since_best_ >= patience_; }
  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }

 private:
  int patience_;
  int best_epoch_ = -1;
  double best_loss_ = 0.0;
  int since_best_ = 0;
};

// Epoch 0 evaluates the initial parameters; epochs 1..config.epochs call
// `run_epoch`, which updates `params` and returns the epoch's mean train loss.
// On return `params` holds the best-validation parameters.
TrainReport RunTrainingLoop(const TrainConfig& config, WidirParams& params,
                            const std::function<double()>& initial_train_loss,
                            const std::function<double(int epoch)>& run_epoch,
                            const std::function<double()>& validate);

struct TrainResult {
  WidirParams params;
  TrainReport report;
};

// Mean pairwise hinge loss over every pair of every list.
double MeanPairLoss(const WidirParams& params, std::span<const ListExample> lists);

// Minibatch optimisation of the summed pairwise hinge loss with validation
// early stopping. Single-threaded and deterministic for a fixed seed.
TrainResult Train(const TrainConfig& config, std::span<const ListExample> train,
                  std::span<const ListExample> valid, const WidirDims& dims);

// Adam or SGD over a flat view of the parameters.
class Optimizer {
 public:
  Optimizer(const TrainConfig& config, const WidirParams& shape);
  // `grad` holds the batch-mean gradient.
  void Step(WidirParams& params, const WidirParams& grad);

 private:
  OptimizerKind kind_;
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  long long step_ = 0;
  std::vector<float> m_;
  std::vector<float> v_;
};

}  // namespace widir
