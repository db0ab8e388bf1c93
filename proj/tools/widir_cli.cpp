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

#include <chrono>
#include <csignal>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "widir/data_io.hpp"
#include "widir/error.hpp"
#include "widir/pipeline.hpp"
#include "widir/serving.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

std::optional<widir::Day> OptionalDay(const std::string& text) {
  if (text.empty()) return std::nullopt;
  try {
    return widir::ParseDay(text);
  } catch (const std::invalid_argument& e) {
    throw widir::ConfigError("bad date '" + text + "': " + e.what());
  }
}

volatile std::sig_atomic_t g_stop = 0;

void OnSignal(int) { g_stop = 1; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"widir: contest recommendation pipeline"};
  app.require_subcommand(1);
  std::string root = "runs";
  std::string run_id;
  app.add_option("--output-root", root, "Directory holding run directories")->capture_default_str();

  auto* generate = app.add_subcommand("generate", "Generate a synthetic dataset into a new run");
  std::string gen_config;
  std::uint64_t seed = 1;
  generate->add_option("--run-id", run_id, "Run identifier")->required();
  generate->add_option("--config", gen_config, "Generator config file")->required();
  generate->add_option("--seed", seed, "Root seed")->capture_default_str();

  auto* features = app.add_subcommand("features", "Fit normalization and write feature snapshots");
  std::string train_end, valid_end;
  features->add_option("--run-id", run_id)->required();
  features->add_option("--train-end", train_end, "First day after the training period (YYYY-MM-DD)");
  features->add_option("--valid-end", valid_end, "First day after the validation period (YYYY-MM-DD)");

  auto* train = app.add_subcommand("train", "Train the model");
  std::string train_config;
  train->add_option("--run-id", run_id)->required();
  train->add_option("--config", train_config, "Training config file")->required();

  auto* eval = app.add_subcommand("eval", "Offline precision/recall against the popularity baseline");
  eval->add_option("--run-id", run_id)->required();

  auto* infer = app.add_subcommand("infer", "Batch-score upcoming matches for active players");
  std::string as_of;
  int horizon = 3;
  infer->add_option("--run-id", run_id)->required();
  infer->add_option("--as-of", as_of, "Inference day (YYYY-MM-DD); default: start of test period");
  infer->add_option("--horizon", horizon, "Days of upcoming matches")->capture_default_str();

  auto* abtest = app.add_subcommand("abtest", "Simulated A/B experiment");
  widir::AbOptions ab;
  abtest->add_option("--run-id", run_id)->required();
  abtest->add_option("--boost", ab.boost, "Attention boost on exposed recommendations")->capture_default_str();
  abtest->add_option("--exposed", ab.exposed_h, "Number of exposed recommendations")->capture_default_str();
  abtest->add_option("--seed", ab.seed, "Simulation seed")->capture_default_str();

  auto* reproduce = app.add_subcommand("reproduce", "Re-run a phase and verify artifact digests");
  std::string phase;
  reproduce->add_option("run_id", run_id, "Run identifier")->required();
  reproduce->add_option("--phase", phase, "Phase to re-run (default: every recorded phase)");

  auto* serve = app.add_subcommand("serve", "Serve rankings over HTTP");
  std::string serve_config;
  std::string payloads, fallbacks;
  serve->add_option("--config", serve_config, "Serving config file");
  serve->add_option("--run-id", run_id, "Load payloads and fallbacks from this run's infer phase");
  serve->add_option("--payloads", payloads, "Payload file");
  serve->add_option("--fallback", fallbacks, "Fallback file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version come through here with code 0.
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*serve) {
      widir::KeyValueConfig kv;
      if (!serve_config.empty()) kv = widir::KeyValueConfig::Load(serve_config);
      if (!run_id.empty()) {
        const widir::Pipeline p(root, run_id);
        if (!kv.Has("payload_path")) kv.Set("payload_path", (p.run_dir() / "infer/payloads.tsv").string());
        if (!kv.Has("fallback_path")) kv.Set("fallback_path", (p.run_dir() / "infer/fallback.tsv").string());
      }
      if (!payloads.empty()) kv.Set("payload_path", payloads);
      if (!fallbacks.empty()) kv.Set("fallback_path", fallbacks);
      const widir::ServingConfig config = widir::ServingConfig::FromKeyValue(kv);
      widir::OnlineStore store;
      if (!config.payload_path.empty()) store.LoadPayloads(config.payload_path);
      if (!config.fallback_path.empty()) store.LoadFallbacks(config.fallback_path);
      widir::RankingServer server(store, config);
      std::signal(SIGINT, OnSignal);
      std::signal(SIGTERM, OnSignal);
      server.Start();
      std::fprintf(stderr, "serving %zu payloads on %s:%d\n", store.size(), config.host.c_str(),
                   server.port());
      while (g_stop == 0) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.Stop();
      return kExitOk;
    }

    widir::Pipeline pipeline(root, run_id);
    if (*generate) {
      pipeline.Generate(gen_config, seed);
    } else if (*features) {
      pipeline.Features({OptionalDay(train_end), OptionalDay(valid_end)});
    } else if (*train) {
      pipeline.Train(train_config);
    } else if (*eval) {
      pipeline.Eval();
      std::cout << widir::ReadFile(pipeline.run_dir() / "eval/eval_report.txt");
    } else if (*infer) {
      pipeline.Infer(OptionalDay(as_of), horizon);
    } else if (*abtest) {
      pipeline.AbTest(ab);
      std::cout << widir::ReadFile(pipeline.run_dir() / "abtest/ab_report.txt");
    } else if (*reproduce) {
      std::vector<std::string> phases;
      if (!phase.empty()) {
        phases.push_back(phase);
      } else {
        for (const auto& p : pipeline.LoadManifest().phases) phases.push_back(p.name);
      }
      bool ok = true;
      for (const std::string& name : phases) {
        const widir::ReproduceResult r = pipeline.Reproduce(name);
        for (const auto& a : r.matched) std::cout << name << "\tmatch\t" << a << "\n";
        for (const auto& a : r.skipped) std::cout << name << "\tskipped (non-deterministic)\t" << a << "\n";
        for (const auto& a : r.mismatched) std::cout << name << "\tMISMATCH\t" << a << "\n";
        ok = ok && r.ok();
      }
      if (!ok) {
        std::cerr << "reproduce: digest mismatch\n";
        return kExitData;
      }
    }
    return kExitOk;
  } catch (const widir::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const widir::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
