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

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "widir/data_io.hpp"
#include "widir/error.hpp"
#include "widir/pipeline.hpp"

namespace widir {
namespace {

namespace fs = std::filesystem;

const fs::path kConfigs = fs::path(WIDIR_SOURCE_DIR) / "configs";

struct CliResult {
  int code = -1;
  std::string output;
};

// Runs the CLI with stderr folded into stdout.
CliResult RunCli(const std::string& args) {
  const std::string cmd = std::string(WIDIR_CLI_PATH) + " " + args + " 2>&1";
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(::popen(cmd.c_str(), "r"), ::pclose);
  CliResult r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe.get())) > 0) r.output.append(buf.data(), n);
  const int status = ::pclose(pipe.release());
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path FreshRoot(const std::string& name) {
  // Per process, since ctest may run the cases in parallel.
  const fs::path root =
      fs::temp_directory_path() / ("widir_pipeline_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  return root;
}

void RunDesk(const fs::path& root, const std::string& run_id, std::uint64_t seed) {
  Pipeline p(root, run_id);
  p.Generate(kConfigs / "desk.conf", seed);
  p.Features({});
  p.Train(kConfigs / "train_desk.conf");
  p.Eval();
  p.Infer(std::nullopt, 3);
  p.AbTest({});
}

class DeskRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = new fs::path(FreshRoot("desk"));
    RunDesk(*root_, "r1", 7);
  }
  static void TearDownTestSuite() {
    fs::remove_all(*root_);
    delete root_;
  }
  static fs::path* root_;
};
fs::path* DeskRun::root_ = nullptr;

TEST(DigestTest, KnownVectors) {
  EXPECT_EQ(Sha256Hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(Sha256Hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_F(DeskRun, ManifestCoversEveryArtifact) {
  const Pipeline p(*root_, "r1");
  const RunManifest m = p.LoadManifest();
  EXPECT_EQ(m.run_id, "r1");
  EXPECT_EQ(m.seed, 7u);
  for (const char* phase : {"generate", "features", "train", "eval", "infer", "abtest"}) {
    EXPECT_NE(m.FindPhase(phase), nullptr) << phase;
  }
  EXPECT_EQ(m.FindPhase("serve"), nullptr);
  for (const auto& [name, a] : m.artifacts) {
    const fs::path path = p.run_dir() / a.path;
    ASSERT_TRUE(fs::exists(path)) << a.path;
    const std::string digest = fs::is_directory(path) ? Sha256Directory(path) : Sha256File(path);
    EXPECT_EQ(digest, a.sha256) << a.path;
  }
  // Every file in the run is reachable from some artifact.
  for (const auto& entry : fs::recursive_directory_iterator(p.run_dir())) {
    if (!entry.is_regular_file() || entry.path().filename() == "manifest.json") continue;
    const std::string rel = fs::relative(entry.path(), p.run_dir()).generic_string();
    bool covered = false;
    for (const auto& [name, a] : m.artifacts) {
      covered = covered || rel == a.path || rel.rfind(a.path + "/", 0) == 0;
    }
    EXPECT_TRUE(covered) << rel;
  }
  EXPECT_EQ(m.schema_versions.at("manifest"), kManifestSchemaVersion);
}

TEST_F(DeskRun, ManifestJsonRoundTrip) {
  const RunManifest m = Pipeline(*root_, "r1").LoadManifest();
  const RunManifest back = RunManifest::FromJson(m.ToJson());
  EXPECT_EQ(back.ToJson(), m.ToJson());
  EXPECT_THROW(RunManifest::FromJson("{"), DataError);
  std::string wrong = m.ToJson();
  wrong.replace(wrong.find(kManifestSchemaVersion), kManifestSchemaVersion.size(), "widir-manifest-v0");
  try {
    RunManifest::FromJson(wrong);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("widir-manifest-v0"), std::string::npos);
  }
}

TEST_F(DeskRun, EvalReportComparesAgainstPopularity) {
  const std::string report = ReadFile(Pipeline(*root_, "r1").run_dir() / "eval/eval_report.txt");
  EXPECT_NE(report.find("model = widir"), std::string::npos);
  EXPECT_NE(report.find("model = popularity"), std::string::npos);
  EXPECT_NE(report.find("recall@10 = "), std::string::npos);
}

TEST_F(DeskRun, ReproduceMatchesGenerateAndTrain) {
  const Pipeline p(*root_, "r1");
  for (const char* phase : {"generate", "train"}) {
    const ReproduceResult r = p.Reproduce(phase);
    EXPECT_TRUE(r.ok()) << phase;
    EXPECT_FALSE(r.matched.empty()) << phase;
  }
  EXPECT_THROW(p.Reproduce("nonsense"), Error);
}

TEST_F(DeskRun, ReproduceDetectsTamperedDigest) {
  const fs::path copy = FreshRoot("tamper");
  fs::copy(Pipeline(*root_, "r1").run_dir(), copy / "r1", fs::copy_options::recursive);
  const Pipeline p(copy, "r1");
  std::string json = ReadFile(p.manifest_path());
  const RunManifest m = p.LoadManifest();
  const std::string digest = m.artifacts.at("model/model.bin").sha256;
  json.replace(json.find(digest), digest.size(), std::string(64, '0'));
  std::ofstream(p.manifest_path(), std::ios::trunc) << json;
  const ReproduceResult r = p.Reproduce("train");
  EXPECT_FALSE(r.ok());
  EXPECT_NE(std::find(r.mismatched.begin(), r.mismatched.end(), "model/model.bin"), r.mismatched.end());
  fs::remove_all(copy);
}

TEST_F(DeskRun, SecondRunGivesIdenticalReports) {
  const fs::path other = FreshRoot("second");
  RunDesk(other, "r1", 7);
  for (const char* file : {"eval/eval_report.txt", "model/model.bin", "infer/payloads.tsv", "abtest/ab_report.txt"}) {
    EXPECT_EQ(Sha256File(other / "r1" / file), Sha256File(*root_ / "r1" / file)) << file;
  }
  fs::remove_all(other);
}

TEST_F(DeskRun, CliReproduceExitsZero) {
  const CliResult r = RunCli("--output-root " + root_->string() + " reproduce r1 --phase generate");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("generate\tmatch\t"), std::string::npos);
  EXPECT_EQ(r.output.find("MISMATCH"), std::string::npos);
}

TEST(CliTest, ExitCodesAndMessages) {
  const fs::path root = FreshRoot("cli");
  EXPECT_EQ(RunCli("--help").code, 0);
  // Usage error.
  EXPECT_EQ(RunCli("--output-root " + root.string() + " generate").code, 1);
  EXPECT_EQ(RunCli("frobnicate").code, 1);
  // Unknown config key names the key.
  const fs::path bad = root / "bad.conf";
  std::ofstream(bad) << "players = 10\nplayerz = 3\n";
  CliResult r = RunCli("--output-root " + root.string() + " generate --run-id x --config " + bad.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("playerz"), std::string::npos) << r.output;
  EXPECT_FALSE(fs::exists(root / "x" / "manifest.json"));
  // Missing config file names the path.
  r = RunCli("--output-root " + root.string() + " generate --run-id y --config " + (root / "none.conf").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("none.conf"), std::string::npos);
  // Missing artifacts are data errors naming the path.
  r = RunCli("--output-root " + root.string() + " features --run-id ghost");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("ghost"), std::string::npos);
  r = RunCli("--output-root " + root.string() + " reproduce ghost");
  EXPECT_EQ(r.code, 2);
  fs::remove_all(root);
}

TEST(CliTest, GenerateRefusesExistingRunAndBadOrder) {
  const fs::path root = FreshRoot("order");
  const fs::path small = root / "small.conf";
  std::ofstream(small) << "players = 60\nmatches = 10\ntemplates_per_match = 8\n"
                          "template_catalog_size = 20\ndays = 42\n";
  const std::string pre = "--output-root " + root.string();
  EXPECT_EQ(RunCli(pre + " generate --run-id a --config " + small.string()).code, 0);
  const CliResult again = RunCli(pre + " generate --run-id a --config " + small.string());
  EXPECT_EQ(again.code, 1);
  EXPECT_NE(again.output.find("already exists"), std::string::npos);
  // Training before features is a missing-artifact error.
  const CliResult early = RunCli(pre + " train --run-id a --config " + (kConfigs / "train_desk.conf").string());
  EXPECT_EQ(early.code, 2) << early.output;
  fs::remove_all(root);
}

}  // namespace
}  // namespace widir
