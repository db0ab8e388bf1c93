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

#include <atomic>
#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "widir/batch.hpp"
#include "widir/error.hpp"
#include "widir/evaluator.hpp"
#include "widir/kv_config.hpp"

namespace httplib {
class Server;
}

namespace widir {

// An immutable payload plus its template -> position index.
struct StoredRanking {
  RankingPayload payload;
  std::unordered_map<std::string, std::size_t> position;
};

// In-process online store. Values are immutable and swapped whole under a
// short lock, so a reader holds either the old or the new payload.
class OnlineStore : public RankingStore {
 public:
  void Put(RankingPayload payload) override;
  std::shared_ptr<const StoredRanking> Get(std::string_view player_id,
                                           std::string_view match_id) const;

  void PutFallback(const RankedSlate& slate);
  std::shared_ptr<const StoredRanking> GetFallback(std::string_view match_id) const;

  std::size_t size() const;
  std::string model_version() const;

  void LoadPayloads(const std::filesystem::path& path);
  void LoadFallbacks(const std::filesystem::path& path);

 private:
  static std::string Key(std::string_view player_id, std::string_view match_id);

  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<const StoredRanking>> payloads_;
  std::unordered_map<std::string, std::shared_ptr<const StoredRanking>> fallbacks_;
  std::string model_version_;
};

// One line per match: match_id then template:score items.
std::string SerializeFallback(const RankedSlate& slate);
RankedSlate ParseFallback(std::string_view line);

class RequestError : public Error {
 public:
  using Error::Error;
};

struct LiveContest {
  std::string contest_id;
  std::string template_id;
};

struct RankRequest {
  std::string player_id;
  std::string match_id;
  std::vector<LiveContest> contests;
};

enum class RankSource { kPersonalized, kFallback };

struct RankResponse {
  std::vector<std::pair<std::string, double>> contests;
  RankSource source = RankSource::kFallback;
  std::int64_t served_in_micros = 0;
};

inline constexpr std::size_t kMaxLiveContests = 2000;

RankResponse RankLive(const OnlineStore& store, const RankRequest& request,
                      std::size_t max_contests = kMaxLiveContests);

RankRequest ParseRankRequest(std::string_view json);
std::string SerializeRankResponse(const RankResponse& response);

// Parse, rank and serialize one request body; served_in_micros covers the whole
// in-process path.
std::string HandleRankBody(const OnlineStore& store, std::string_view body,
                           std::size_t max_contests = kMaxLiveContests);

struct ServingConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string payload_path;
  std::string fallback_path;
  std::size_t max_request_bytes = 1 << 20;
  std::size_t max_contests = kMaxLiveContests;

  // Environment variables WIDIR_HOST, WIDIR_PORT, WIDIR_PAYLOAD_PATH,
  // WIDIR_FALLBACK_PATH, WIDIR_MAX_REQUEST_BYTES override file values.
  static ServingConfig FromKeyValue(const KeyValueConfig& kv, bool apply_env = true);
};

class RankingServer {
 public:
  RankingServer(const OnlineStore& store, ServingConfig config);
  ~RankingServer();
  RankingServer(const RankingServer&) = delete;
  RankingServer& operator=(const RankingServer&) = delete;

  // Binds and serves on a background thread. Throws Error on bind failure.
  // Port 0 binds an ephemeral port.
  void Start();
  // Blocks in the calling thread.
  void Run();
  void Stop();
  int port() const { return bound_port_; }

 private:
  void Bind();

  const OnlineStore& store_;
  ServingConfig config_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int bound_port_ = 0;
};

}  // namespace widir
