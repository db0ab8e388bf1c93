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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "widir/time.hpp"

namespace widir {

inline constexpr std::string_view kManifestSchemaVersion = "widir-manifest-v1";

std::string Sha256Hex(std::string_view bytes);
std::string Sha256File(const std::filesystem::path& path);
// Digest over the sorted relative paths and contents of every regular file.
std::string Sha256Directory(const std::filesystem::path& dir);

struct ArtifactRecord {
  std::string path;  // relative to the run directory
  std::string sha256;
  // Non-deterministic artifacts (wall-clock timings) are recorded but not
  // compared by Reproduce.
  bool deterministic = true;
};

struct PhaseRecord {
  std::string name;
  std::map<std::string, std::string> params;
  std::vector<std::string> outputs;
  std::string started_at;
  std::string finished_at;
};

struct RunManifest {
  std::string run_id;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> configs;  // name -> path in run dir
  std::map<std::string, ArtifactRecord> artifacts;
  std::vector<PhaseRecord> phases;
  std::map<std::string, std::string> schema_versions;

  const PhaseRecord* FindPhase(const std::string& name) const;
  std::string ToJson() const;
  static RunManifest FromJson(std::string_view text);
};

struct FeatureOptions {
  // Defaults to 60% / 80% of the generated date range.
  std::optional<Day> train_end_day;
  std::optional<Day> valid_end_day;
};

struct AbOptions {
  double boost = 2.0;
  int exposed_h = 5;
  std::uint64_t seed = 1;
};

struct ReproduceResult {
  std::string phase;
  std::vector<std::string> matched;
  std::vector<std::string> mismatched;
  std::vector<std::string> skipped;

  bool ok() const { return mismatched.empty(); }
};

// Phases of one run under <output_root>/<run_id>/. Every phase validates its
// inputs, writes its artifacts and updates manifest.json.
class Pipeline {
 public:
  Pipeline(std::filesystem::path output_root, std::string run_id);

  const std::filesystem::path& run_dir() const { return run_dir_; }
  std::filesystem::path manifest_path() const { return run_dir_ / "manifest.json"; }
  RunManifest LoadManifest() const;

  // `fresh` requires the run directory not to exist yet.
  void Generate(const std::filesystem::path& config_path, std::uint64_t seed, bool fresh = true);
  void Features(const FeatureOptions& options);
  void Train(const std::filesystem::path& config_path);
  void Eval();
  void Infer(std::optional<Day> as_of_day, int horizon_days);
  void AbTest(const AbOptions& options);

  // Re-executes a recorded phase in a scratch copy of the run and compares the
  // resulting artifact digests with the manifest.
  ReproduceResult Reproduce(const std::string& phase) const;

 private:
  void Record(RunManifest& manifest, PhaseRecord phase,
              const std::vector<std::pair<std::string, bool>>& outputs) const;
  void SaveManifest(const RunManifest& manifest) const;

  std::filesystem::path output_root_;
  std::string run_id_;
  std::filesystem::path run_dir_;
};

}  // namespace widir
