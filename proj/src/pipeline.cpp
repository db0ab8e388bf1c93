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

#include "widir/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "widir/abtest.hpp"
#include "widir/batch.hpp"
#include "widir/data_io.hpp"
#include "widir/error.hpp"
#include "widir/evaluator.hpp"
#include "widir/features.hpp"
#include "widir/generator.hpp"
#include "widir/model.hpp"
#include "widir/serving.hpp"
#include "widir/trainer.hpp"

namespace widir {
namespace fs = std::filesystem;
namespace {

using Json = nlohmann::json;

constexpr const char* kGeneratorConfig = "config/generator.conf";
constexpr const char* kTrainConfig = "config/train.conf";
constexpr const char* kDataDir = "data";
constexpr const char* kFeatureDir = "features";
constexpr const char* kSplitFile = "features/split.txt";
constexpr const char* kModelFile = "model/model.bin";
constexpr const char* kTrainReport = "model/train_report.txt";
constexpr const char* kTrainSummary = "model/train_summary.txt";
constexpr const char* kEvalReport = "eval/eval_report.txt";
constexpr const char* kInferDir = "infer";
constexpr const char* kPayloads = "infer/payloads.tsv";
constexpr const char* kFallbacks = "infer/fallback.tsv";
constexpr const char* kInferSnapshot = "infer/snapshot";
constexpr const char* kAbReport = "abtest/ab_report.txt";

std::string NowIso() {
  return FormatTimestamp(static_cast<Timestamp>(std::time(nullptr)));
}

void Require(const fs::path& path, const std::string& phase) {
  if (!fs::exists(path)) {
    throw DataError("missing artifact " + path.string() + " (run the " + phase + " phase first)");
  }
}

struct SplitInfo {
  Day train_end_day = 0;
  Day valid_end_day = 0;
  // Joins at or before these instants belong to the earlier partition.
  Timestamp train_end() const { return DayStart(train_end_day) - 1; }
  Timestamp valid_end() const { return DayStart(valid_end_day) - 1; }
};

SplitInfo ReadSplit(const fs::path& path) {
  const KeyValueConfig kv = KeyValueConfig::Load(path);
  kv.RequireKnownKeys({"train_end_day", "valid_end_day"});
  try {
    return {ParseDay(kv.GetString("train_end_day", "")), ParseDay(kv.GetString("valid_end_day", ""))};
  } catch (const std::invalid_argument& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

GeneratorConfig ReadGeneratorConfig(const fs::path& run_dir) {
  Require(run_dir / kGeneratorConfig, "generate");
  return GeneratorConfig::FromKeyValue(KeyValueConfig::Load(run_dir / kGeneratorConfig));
}

std::string DigestOf(const fs::path& path) {
  return fs::is_directory(path) ? Sha256Directory(path) : Sha256File(path);
}

}  // namespace

std::string Sha256Hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string Sha256File(const fs::path& path) { return Sha256Hex(ReadFile(path)); }

std::string Sha256Directory(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::vector<std::pair<std::string, fs::path>> rel;
  for (const fs::path& f : files) rel.emplace_back(fs::relative(f, dir).generic_string(), f);
  std::sort(rel.begin(), rel.end());
  std::string listing;
  for (const auto& [name, path] : rel) listing += name + "\t" + Sha256File(path) + "\n";
  return Sha256Hex(listing);
}

const PhaseRecord* RunManifest::FindPhase(const std::string& name) const {
  for (auto it = phases.rbegin(); it != phases.rend(); ++it)
    if (it->name == name) return &*it;
  return nullptr;
}

std::string RunManifest::ToJson() const {
  Json doc;
  doc["schema_version"] = kManifestSchemaVersion;
  doc["run_id"] = run_id;
  doc["seed"] = seed;
  doc["configs"] = configs;
  Json arts = Json::object();
  for (const auto& [key, a] : artifacts) {
    arts[key] = {{"path", a.path}, {"sha256", a.sha256}, {"deterministic", a.deterministic}};
  }
  doc["artifacts"] = arts;
  Json ph = Json::array();
  for (const PhaseRecord& p : phases) {
    ph.push_back({{"name", p.name},
                  {"params", p.params},
                  {"outputs", p.outputs},
                  {"started_at", p.started_at},
                  {"finished_at", p.finished_at}});
  }
  doc["phases"] = ph;
  doc["schema_versions"] = schema_versions;
  return doc.dump(2) + "\n";
}

RunManifest RunManifest::FromJson(std::string_view text) {
  const Json doc = Json::parse(text.begin(), text.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw DataError("manifest is not valid JSON");
  try {
    if (doc.at("schema_version").get<std::string>() != kManifestSchemaVersion) {
      throw DataError("manifest schema version " + doc.at("schema_version").get<std::string>() +
                      ", expected " + std::string(kManifestSchemaVersion));
    }
    RunManifest m;
    m.run_id = doc.at("run_id").get<std::string>();
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.configs = doc.at("configs").get<std::map<std::string, std::string>>();
    for (const auto& [key, a] : doc.at("artifacts").items()) {
      m.artifacts[key] = {a.at("path").get<std::string>(), a.at("sha256").get<std::string>(),
                          a.at("deterministic").get<bool>()};
    }
    for (const Json& p : doc.at("phases")) {
      m.phases.push_back({p.at("name").get<std::string>(),
                          p.at("params").get<std::map<std::string, std::string>>(),
                          p.at("outputs").get<std::vector<std::string>>(),
                          p.at("started_at").get<std::string>(),
                          p.at("finished_at").get<std::string>()});
    }
    m.schema_versions = doc.at("schema_versions").get<std::map<std::string, std::string>>();
    return m;
  } catch (const Json::exception& e) {
    throw DataError(std::string("manifest: ") + e.what());
  }
}

Pipeline::Pipeline(fs::path output_root, std::string run_id)
    : output_root_(std::move(output_root)), run_id_(std::move(run_id)) {
  if (run_id_.empty() || run_id_.find_first_of("/\\") != std::string::npos || run_id_[0] == '.') {
    throw ConfigError("invalid run id '" + run_id_ + "'");
  }
  run_dir_ = output_root_ / run_id_;
}

RunManifest Pipeline::LoadManifest() const {
  Require(manifest_path(), "generate");
  return RunManifest::FromJson(ReadFile(manifest_path()));
}

void Pipeline::SaveManifest(const RunManifest& manifest) const {
  WriteFileAtomic(manifest_path(), manifest.ToJson());
}

void Pipeline::Record(RunManifest& manifest, PhaseRecord phase,
                      const std::vector<std::pair<std::string, bool>>& outputs) const {
  for (const auto& [rel, deterministic] : outputs) {
    manifest.artifacts[rel] = {rel, DigestOf(run_dir_ / rel), deterministic};
    phase.outputs.push_back(rel);
  }
  phase.finished_at = NowIso();
  manifest.phases.erase(std::remove_if(manifest.phases.begin(), manifest.phases.end(),
                                       [&](const PhaseRecord& p) { return p.name == phase.name; }),
                        manifest.phases.end());
  manifest.phases.push_back(std::move(phase));
  SaveManifest(manifest);
}

void Pipeline::Generate(const fs::path& config_path, std::uint64_t seed, bool fresh) {
  if (fresh && fs::exists(run_dir_)) {
    throw ConfigError("run '" + run_id_ + "' already exists under " + output_root_.string());
  }
  PhaseRecord phase{"generate", {{"seed", std::to_string(seed)}}, {}, NowIso(), ""};
  const KeyValueConfig kv = KeyValueConfig::Load(config_path);
  const GeneratorConfig config = GeneratorConfig::FromKeyValue(kv);
  fs::create_directories(run_dir_ / "config");
  const std::string config_text = ReadFile(config_path);
  if (fs::absolute(config_path) != fs::absolute(run_dir_ / kGeneratorConfig)) {
    WriteFileAtomic(run_dir_ / kGeneratorConfig, config_text);
  }
  const Dataset data = GenerateSynthetic(config, seed);
  const std::vector<std::string> problems = CheckIntegrity(data);
  if (!problems.empty()) throw Error("generated dataset failed integrity: " + problems.front());
  WriteDataset(DatasetPaths::InDirectory(run_dir_ / kDataDir), data);

  RunManifest manifest;
  if (!fresh && fs::exists(manifest_path())) manifest = LoadManifest();
  manifest.run_id = run_id_;
  manifest.seed = seed;
  manifest.configs["generator"] = kGeneratorConfig;
  manifest.schema_versions["manifest"] = std::string(kManifestSchemaVersion);
  manifest.schema_versions["features"] = std::string(kFeatureSchemaVersion);
  manifest.schema_versions["model"] = std::to_string(kModelFormatVersion);
  Record(manifest, std::move(phase), {{kGeneratorConfig, true}, {kDataDir, true}});
}

void Pipeline::Features(const FeatureOptions& options) {
  RunManifest manifest = LoadManifest();
  const GeneratorConfig gen = ReadGeneratorConfig(run_dir_);
  Require(run_dir_ / kDataDir, "generate");
  const Dataset data = ReadDataset(DatasetPaths::InDirectory(run_dir_ / kDataDir));
  const Day first = gen.start_day;
  const Day last = gen.start_day + gen.days;
  SplitInfo split;
  split.train_end_day = options.train_end_day.value_or(first + gen.days * 6 / 10);
  split.valid_end_day = options.valid_end_day.value_or(first + gen.days * 8 / 10);
  if (!(first < split.train_end_day && split.train_end_day < split.valid_end_day &&
        split.valid_end_day <= last)) {
    throw ConfigError("split days must satisfy start < train_end < valid_end <= end of range");
  }
  PhaseRecord phase{"features",
                    {{"train_end_day", FormatDay(split.train_end_day)},
                     {"valid_end_day", FormatDay(split.valid_end_day)}},
                    {},
                    NowIso(),
                    ""};
  const TimeSplit parts = SplitByTime(data.joins, split.train_end(), split.valid_end(),
                                      DayStart(first), DayStart(last));
  if (parts.train.empty()) throw DataError("training partition is empty");
  const ContestCatalog catalog(data.contests);
  const NormalizationStats stats = FitNormalization(parts.train, catalog);

  const fs::path root = run_dir_ / kFeatureDir;
  fs::remove_all(root);
  fs::create_directories(root);
  KeyValueConfig split_kv;
  split_kv.Set("train_end_day", FormatDay(split.train_end_day));
  split_kv.Set("valid_end_day", FormatDay(split.valid_end_day));
  WriteFileAtomic(run_dir_ / kSplitFile, split_kv.Serialize());

  // Snapshots are materialized for the evaluation period; earlier days are
  // rebuilt in memory by the train phase from the same inputs.
  OfflineFeatureStore store(root);
  store.WriteManifest(stats);
  const PlayerHistoryIndex history(data.joins, catalog);
  std::set<Day> days;
  for (const MatchRecord& m : data.matches) {
    if (m.start_time > split.valid_end()) days.insert(FeatureDayForMatch(m.start_time));
  }
  for (Day d : days) store.Write(BuildSnapshot(history, d, stats));
  Record(manifest, std::move(phase), {{kFeatureDir, true}});
}

void Pipeline::Train(const fs::path& config_path) {
  RunManifest manifest = LoadManifest();
  Require(run_dir_ / kSplitFile, "features");
  PhaseRecord phase{"train", {}, {}, NowIso(), ""};
  const TrainConfig config = TrainConfig::FromKeyValue(KeyValueConfig::Load(config_path));
  if (fs::absolute(config_path) != fs::absolute(run_dir_ / kTrainConfig)) {
    WriteFileAtomic(run_dir_ / kTrainConfig, ReadFile(config_path));
  }
  manifest.configs["train"] = kTrainConfig;

  const GeneratorConfig gen = ReadGeneratorConfig(run_dir_);
  const Dataset data = ReadDataset(DatasetPaths::InDirectory(run_dir_ / kDataDir));
  const SplitInfo split = ReadSplit(run_dir_ / kSplitFile);
  const TimeSplit parts = SplitByTime(data.joins, split.train_end(), split.valid_end(),
                                      DayStart(gen.start_day), DayStart(gen.start_day + gen.days));
  const ContestCatalog catalog(data.contests);
  const NormalizationStats stats = OfflineFeatureStore(run_dir_ / kFeatureDir).ReadManifest();
  auto history = std::make_shared<const PlayerHistoryIndex>(data.joins, catalog);
  ComputedSnapshots snapshots(history, stats);

  const std::size_t max_pairs = static_cast<std::size_t>(config.max_pairs_per_list);
  const auto train_lists =
      BuildOrderedLists(parts.train, catalog, data.matches, config.list_length, config.seed);
  const auto valid_lists =
      BuildOrderedLists(parts.valid, catalog, data.matches, config.list_length, config.seed);
  const auto train = MaterializeExamples(train_lists, catalog, stats, snapshots, max_pairs, config.seed);
  const auto valid = MaterializeExamples(valid_lists, catalog, stats, snapshots, max_pairs, config.seed);

  const TrainResult result = ::widir::Train(config, train, valid, WidirDims{});
  fs::create_directories(run_dir_ / "model");
  SaveParams(run_dir_ / kModelFile, result.params);
  WriteFileAtomic(run_dir_ / kTrainReport, result.report.Serialize());

  std::size_t short_lists = 0, pairs = 0;
  for (const auto& l : train_lists) short_lists += l.short_list ? 1 : 0;
  for (const auto& l : valid_lists) short_lists += l.short_list ? 1 : 0;
  for (const auto& e : train) pairs += e.pairs.size();
  KeyValueConfig summary;
  summary.Set("train_lists", std::to_string(train_lists.size()));
  summary.Set("valid_lists", std::to_string(valid_lists.size()));
  summary.Set("short_lists", std::to_string(short_lists));
  summary.Set("train_pairs", std::to_string(pairs));
  summary.Set("epochs_run", std::to_string(result.report.epochs.size() - 1));
  summary.Set("best_epoch", std::to_string(result.report.best_epoch));
  summary.Set("best_valid_loss", FormatDouble(result.report.best_valid_loss));
  summary.Set("stopped_early", result.report.stopped_early ? "true" : "false");
  WriteFileAtomic(run_dir_ / kTrainSummary, summary.Serialize());
  if (short_lists > 0) {
    std::fprintf(stderr, "train: %zu lists shorter than list_length %d (match had too few templates)\n",
                 short_lists, config.list_length);
  }
  Record(manifest, std::move(phase),
         {{kTrainConfig, true}, {kModelFile, true}, {kTrainSummary, true}, {kTrainReport, false}});
}

void Pipeline::Eval() {
  RunManifest manifest = LoadManifest();
  Require(run_dir_ / kModelFile, "train");
  PhaseRecord phase{"eval", {}, {}, NowIso(), ""};
  const GeneratorConfig gen = ReadGeneratorConfig(run_dir_);
  const Dataset data = ReadDataset(DatasetPaths::InDirectory(run_dir_ / kDataDir));
  const SplitInfo split = ReadSplit(run_dir_ / kSplitFile);
  const TimeSplit parts = SplitByTime(data.joins, split.train_end(), split.valid_end(),
                                      DayStart(gen.start_day), DayStart(gen.start_day + gen.days));
  const ContestCatalog catalog(data.contests);
  const OfflineFeatureStore store(run_dir_ / kFeatureDir);
  const NormalizationStats stats = store.ReadManifest();
  const WidirParams params = LoadParams(run_dir_ / kModelFile);
  StoredSnapshots snapshots(store);
  const std::vector<int> cutoffs(kDefaultCutoffs.begin(), kDefaultCutoffs.end());
  const EvalReport widir =
      Evaluate("widir", ModelScorer(params, stats, snapshots), parts.test, catalog, data.matches, cutoffs);
  const EvalReport popular =
      Evaluate("popularity", PopularityScorer(), parts.test, catalog, data.matches, cutoffs);
  fs::create_directories(run_dir_ / "eval");
  WriteFileAtomic(run_dir_ / kEvalReport, widir.Serialize() + "\n" + popular.Serialize());
  Record(manifest, std::move(phase), {{kEvalReport, true}});
}

void Pipeline::Infer(std::optional<Day> as_of_day, int horizon_days) {
  RunManifest manifest = LoadManifest();
  Require(run_dir_ / kModelFile, "train");
  if (horizon_days < 1) throw ConfigError("horizon must be >= 1 day");
  const SplitInfo split = ReadSplit(run_dir_ / kSplitFile);
  const Day day = as_of_day.value_or(split.valid_end_day);
  PhaseRecord phase{"infer",
                    {{"as_of_day", FormatDay(day)}, {"horizon_days", std::to_string(horizon_days)}},
                    {},
                    NowIso(),
                    ""};
  const Dataset data = ReadDataset(DatasetPaths::InDirectory(run_dir_ / kDataDir));
  const ContestCatalog catalog(data.contests);
  const NormalizationStats stats = OfflineFeatureStore(run_dir_ / kFeatureDir).ReadManifest();
  const WidirParams params = LoadParams(run_dir_ / kModelFile);

  const PlayerHistoryIndex history(data.joins, catalog);
  const FeatureSnapshot snapshot = BuildSnapshot(history, day, stats);
  fs::remove_all(run_dir_ / kInferDir);
  OfflineFeatureStore snap_store(run_dir_ / kInferSnapshot);
  snap_store.WriteManifest(stats);
  snap_store.Write(snapshot);

  std::vector<MatchRecord> upcoming;
  for (const MatchRecord& m : data.matches) {
    const Day d = FeatureDayForMatch(m.start_time);
    if (d >= day && d < day + horizon_days) upcoming.push_back(m);
  }
  BatchOptions options;
  options.model_version = Sha256File(run_dir_ / kModelFile).substr(0, 12);
  options.generated_at = DayStart(day);
  const std::set<std::string> active = ActivePlayers(data.joins, day);
  const std::vector<RankingPayload> payloads =
      RunBatch(params, snapshot, stats, upcoming, catalog, active, options, nullptr);
  std::string text;
  for (const RankingPayload& p : payloads) text += p.Serialize() + "\n";
  WriteFileAtomic(run_dir_ / kPayloads, text);
  std::string fallback;
  for (const MatchRecord& m : upcoming) {
    std::vector<ContestSpec> live;
    for (const std::string& tid : catalog.MatchTemplates(m.match_id)) live.push_back(catalog.Template(tid));
    if (live.empty()) continue;
    fallback += SerializeFallback(PopularityRank(live)) + "\n";
  }
  WriteFileAtomic(run_dir_ / kFallbacks, fallback);
  Record(manifest, std::move(phase), {{kInferDir, true}});
}

void Pipeline::AbTest(const AbOptions& options) {
  RunManifest manifest = LoadManifest();
  Require(run_dir_ / kModelFile, "train");
  PhaseRecord phase{"abtest",
                    {{"boost", FormatDouble(options.boost)},
                     {"exposed_h", std::to_string(options.exposed_h)},
                     {"seed", std::to_string(options.seed)}},
                    {},
                    NowIso(),
                    ""};
  const GeneratorConfig gen = ReadGeneratorConfig(run_dir_);
  const Dataset data = ReadDataset(DatasetPaths::InDirectory(run_dir_ / kDataDir));
  const SplitInfo split = ReadSplit(run_dir_ / kSplitFile);
  const ContestCatalog catalog(data.contests);
  const OfflineFeatureStore store(run_dir_ / kFeatureDir);
  const NormalizationStats stats = store.ReadManifest();
  const WidirParams params = LoadParams(run_dir_ / kModelFile);
  StoredSnapshots snapshots(store);

  std::unordered_map<std::string, PlayerArchetype> archetypes;
  std::unordered_map<std::string, double> joins_before;
  std::vector<std::string> ids;
  for (const PlayerProfile& p : data.players) {
    archetypes[p.player_id] = p.archetype;
    ids.push_back(p.player_id);
  }
  for (const JoinRecord& j : data.joins) {
    if (j.joining_time <= split.valid_end()) joins_before[j.player_id] += 1.0;
  }
  std::vector<double> activity;
  for (const std::string& id : ids) activity.push_back(joins_before[id]);
  const std::size_t third = ids.size() / 3;
  const std::vector<std::size_t> sizes = {third, third, third};
  const CohortAssignment cohorts = AssignCohorts(ids, activity, sizes, options.seed);

  std::vector<MatchRecord> test_matches;
  for (const MatchRecord& m : data.matches) {
    if (m.start_time > split.valid_end()) test_matches.push_back(m);
  }
  std::sort(test_matches.begin(), test_matches.end(),
            [](const MatchRecord& a, const MatchRecord& b) {
              return std::tie(a.start_time, a.match_id) < std::tie(b.start_time, b.match_id);
            });
  if (test_matches.size() < 2) throw DataError("test period has fewer than two matches");
  const std::size_t half = test_matches.size() / 2;
  const std::span<const MatchRecord> all(test_matches);

  BehaviorModel behavior;
  behavior.boost = options.boost;
  behavior.exposed_h = options.exposed_h;
  behavior.match_participation = gen.match_participation;
  behavior.max_joins_per_match = gen.max_joins_per_match;
  const std::map<std::string, Scorer> policies = {
      {"TG1", ModelScorer(params, stats, snapshots)}, {"TG2", PopularityScorer()}};
  const SimulationOutput pre = SimulatePeriod(cohorts, policies, all.first(half), catalog,
                                              archetypes, behavior, Period::kPre, options.seed);
  const SimulationOutput post = SimulatePeriod(cohorts, policies, all.subspan(half), catalog,
                                               archetypes, behavior, Period::kPost, options.seed);
  const AbReport report = MakeAbReport(pre.aggregates, post.aggregates);
  fs::create_directories(run_dir_ / "abtest");
  WriteFileAtomic(run_dir_ / kAbReport,
                  "# TG1 = widir, TG2 = popularity, CG = untreated\n" + report.Serialize());
  Record(manifest, std::move(phase), {{kAbReport, true}});
}

ReproduceResult Pipeline::Reproduce(const std::string& phase_name) const {
  const RunManifest manifest = LoadManifest();
  const PhaseRecord* phase = manifest.FindPhase(phase_name);
  if (phase == nullptr) {
    throw DataError("run '" + run_id_ + "' has no recorded phase '" + phase_name + "'");
  }
  const fs::path scratch_root =
      output_root_ / (".reproduce-" + run_id_ + "-" + phase_name + "-" +
                      std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  fs::create_directories(scratch_root);
  struct Cleanup {
    fs::path p;
    ~Cleanup() {
      std::error_code ec;
      fs::remove_all(p, ec);
    }
  } cleanup{scratch_root};
  fs::copy(run_dir_, scratch_root / run_id_, fs::copy_options::recursive);
  Pipeline copy(scratch_root, run_id_);
  for (const std::string& out : phase->outputs) {
    if (out.rfind("config/", 0) == 0) continue;
    fs::remove_all(copy.run_dir() / out);
  }
  const auto& p = phase->params;
  auto param = [&](const std::string& key) {
    const auto it = p.find(key);
    if (it == p.end()) throw DataError("phase '" + phase_name + "' lacks parameter '" + key + "'");
    return it->second;
  };
  if (phase_name == "generate") {
    copy.Generate(copy.run_dir() / kGeneratorConfig, std::stoull(param("seed")), false);
  } else if (phase_name == "features") {
    copy.Features({ParseDay(param("train_end_day")), ParseDay(param("valid_end_day"))});
  } else if (phase_name == "train") {
    copy.Train(copy.run_dir() / kTrainConfig);
  } else if (phase_name == "eval") {
    copy.Eval();
  } else if (phase_name == "infer") {
    copy.Infer(ParseDay(param("as_of_day")), std::stoi(param("horizon_days")));
  } else if (phase_name == "abtest") {
    copy.AbTest({ParseDouble(param("boost")), std::stoi(param("exposed_h")),
                 std::stoull(param("seed"))});
  } else {
    throw ConfigError("unknown phase '" + phase_name + "'");
  }

  ReproduceResult result;
  result.phase = phase_name;
  for (const std::string& out : phase->outputs) {
    const ArtifactRecord& recorded = manifest.artifacts.at(out);
    if (!recorded.deterministic) {
      result.skipped.push_back(out);
      continue;
    }
    const fs::path fresh = copy.run_dir() / out;
    if (fs::exists(fresh) && DigestOf(fresh) == recorded.sha256) {
      result.matched.push_back(out);
    } else {
      result.mismatched.push_back(out);
    }
  }
  return result;
}

}  // namespace widir
