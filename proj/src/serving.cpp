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

#include "widir/serving.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

#include "widir/data_io.hpp"

namespace widir {
namespace {

using Json = nlohmann::json;

std::shared_ptr<const StoredRanking> MakeStored(RankingPayload payload) {
  auto stored = std::make_shared<StoredRanking>();
  stored->position.reserve(payload.ranked.size());
  for (std::size_t i = 0; i < payload.ranked.size(); ++i) {
    stored->position.emplace(payload.ranked[i].first, i);
  }
  stored->payload = std::move(payload);
  return stored;
}

std::string RequireString(const Json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw RequestError(where + ": field '" + key + "' must be a string");
  }
  std::string v = it->get<std::string>();
  if (v.empty()) throw RequestError(where + ": field '" + key + "' is empty");
  return v;
}

std::vector<std::string> ReadLines(const std::filesystem::path& path) {
  std::vector<std::string> lines;
  std::istringstream in(ReadFile(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::string OnlineStore::Key(std::string_view player_id, std::string_view match_id) {
  std::string key(player_id);
  key += '\x1f';
  key += match_id;
  return key;
}

void OnlineStore::Put(RankingPayload payload) {
  std::string key = Key(payload.player_id, payload.match_id);
  std::string version = payload.model_version;
  auto stored = MakeStored(std::move(payload));
  std::unique_lock lock(mutex_);
  payloads_[std::move(key)] = std::move(stored);
  model_version_ = std::move(version);
}

std::shared_ptr<const StoredRanking> OnlineStore::Get(std::string_view player_id,
                                                      std::string_view match_id) const {
  const std::string key = Key(player_id, match_id);
  std::shared_lock lock(mutex_);
  const auto it = payloads_.find(key);
  return it == payloads_.end() ? nullptr : it->second;
}

void OnlineStore::PutFallback(const RankedSlate& slate) {
  RankingPayload p;
  p.match_id = slate.match_id;
  for (const auto& [tid, score] : slate.ranked) p.ranked.emplace_back(tid, static_cast<float>(score));
  auto stored = MakeStored(std::move(p));
  std::unique_lock lock(mutex_);
  fallbacks_[slate.match_id] = std::move(stored);
}

std::shared_ptr<const StoredRanking> OnlineStore::GetFallback(std::string_view match_id) const {
  std::shared_lock lock(mutex_);
  const auto it = fallbacks_.find(std::string(match_id));
  return it == fallbacks_.end() ? nullptr : it->second;
}

std::size_t OnlineStore::size() const {
  std::shared_lock lock(mutex_);
  return payloads_.size();
}

std::string OnlineStore::model_version() const {
  std::shared_lock lock(mutex_);
  return model_version_;
}

void OnlineStore::LoadPayloads(const std::filesystem::path& path) {
  for (const std::string& line : ReadLines(path)) Put(RankingPayload::Parse(line));
}

void OnlineStore::LoadFallbacks(const std::filesystem::path& path) {
  for (const std::string& line : ReadLines(path)) PutFallback(ParseFallback(line));
}

std::string SerializeFallback(const RankedSlate& slate) {
  std::string out = slate.match_id + "\t";
  char buf[40];
  for (std::size_t i = 0; i < slate.ranked.size(); ++i) {
    if (i > 0) out += ',';
    std::snprintf(buf, sizeof buf, "%.17g", slate.ranked[i].second);
    out += slate.ranked[i].first + ":" + buf;
  }
  return out;
}

RankedSlate ParseFallback(std::string_view line) {
  const std::vector<std::string_view> f = SplitFields(line, '\t');
  if (f.size() != 2) throw DataError("fallback line: expected 2 fields");
  RankedSlate slate;
  slate.match_id = std::string(f[0]);
  if (f[1].empty()) return slate;
  for (std::string_view item : SplitFields(f[1], ',')) {
    const std::size_t colon = item.rfind(':');
    if (colon == std::string_view::npos || colon == 0) {
      throw DataError("fallback line: bad item '" + std::string(item) + "'");
    }
    slate.ranked.emplace_back(std::string(item.substr(0, colon)), ParseDouble(item.substr(colon + 1)));
  }
  return slate;
}

RankResponse RankLive(const OnlineStore& store, const RankRequest& request,
                      std::size_t max_contests) {
  const std::size_t n = request.contests.size();
  if (n == 0) throw RequestError("request has no contests");
  if (n > max_contests) {
    throw RequestError("request has " + std::to_string(n) + " contests, limit is " +
                       std::to_string(max_contests));
  }
  std::unordered_set<std::string_view> ids;
  ids.reserve(n);
  for (const LiveContest& c : request.contests) {
    if (c.contest_id.empty() || c.template_id.empty()) throw RequestError("empty contest or template id");
    if (!ids.insert(c.contest_id).second) throw RequestError("duplicate contest_id " + c.contest_id);
  }

  const auto payload = store.Get(request.player_id, request.match_id);
  const auto fallback = store.GetFallback(request.match_id);

  struct Key {
    int tier;
    std::size_t position;
    std::string_view template_id;
    std::string_view contest_id;
    double score;
  };
  std::vector<Key> keys;
  keys.reserve(n);
  for (const LiveContest& c : request.contests) {
    Key k{2, 0, c.template_id, c.contest_id, 0.0};
    if (payload != nullptr) {
      const auto it = payload->position.find(c.template_id);
      if (it != payload->position.end()) {
        k = {0, it->second, {}, c.contest_id, payload->payload.ranked[it->second].second};
      }
    }
    if (k.tier == 2 && fallback != nullptr) {
      const auto it = fallback->position.find(c.template_id);
      if (it != fallback->position.end()) {
        k = {1, it->second, {}, c.contest_id, fallback->payload.ranked[it->second].second};
      }
    }
    keys.push_back(k);
  }
  std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    return std::tie(a.tier, a.position, a.template_id, a.contest_id) <
           std::tie(b.tier, b.position, b.template_id, b.contest_id);
  });
  RankResponse response;
  response.source = payload != nullptr ? RankSource::kPersonalized : RankSource::kFallback;
  response.contests.reserve(n);
  for (const Key& k : keys) response.contests.emplace_back(std::string(k.contest_id), k.score);
  return response;
}

RankRequest ParseRankRequest(std::string_view body) {
  Json doc = Json::parse(body.begin(), body.end(), nullptr, false);
  if (doc.is_discarded()) throw RequestError("malformed JSON body");
  if (!doc.is_object()) throw RequestError("request body must be a JSON object");
  RankRequest req;
  req.player_id = RequireString(doc, "player_id", "request");
  req.match_id = RequireString(doc, "match_id", "request");
  const auto it = doc.find("contests");
  if (it == doc.end() || !it->is_array()) throw RequestError("request: field 'contests' must be an array");
  req.contests.reserve(it->size());
  for (const Json& c : *it) {
    if (!c.is_object()) throw RequestError("contests: every item must be an object");
    req.contests.push_back({RequireString(c, "contest_id", "contest"),
                            RequireString(c, "template_id", "contest")});
  }
  return req;
}

std::string SerializeRankResponse(const RankResponse& response) {
  Json contests = Json::array();
  for (const auto& [id, score] : response.contests) {
    contests.push_back(Json{{"contest_id", id}, {"score", score}});
  }
  Json doc{{"contests", std::move(contests)},
           {"source", response.source == RankSource::kPersonalized ? "personalized" : "fallback"},
           {"served_in_micros", response.served_in_micros}};
  return doc.dump();
}

std::string HandleRankBody(const OnlineStore& store, std::string_view body,
                           std::size_t max_contests) {
  const auto t0 = std::chrono::steady_clock::now();
  RankResponse response = RankLive(store, ParseRankRequest(body), max_contests);
  response.served_in_micros = std::chrono::duration_cast<std::chrono::microseconds>(
                                  std::chrono::steady_clock::now() - t0)
                                  .count();
  return SerializeRankResponse(response);
}

ServingConfig ServingConfig::FromKeyValue(const KeyValueConfig& kv, bool apply_env) {
  kv.RequireKnownKeys(
      {"host", "port", "payload_path", "fallback_path", "max_request_bytes", "max_contests"});
  KeyValueConfig merged = kv;
  if (apply_env) {
    const std::pair<const char*, const char*> env[] = {
        {"WIDIR_HOST", "host"},
        {"WIDIR_PORT", "port"},
        {"WIDIR_PAYLOAD_PATH", "payload_path"},
        {"WIDIR_FALLBACK_PATH", "fallback_path"},
        {"WIDIR_MAX_REQUEST_BYTES", "max_request_bytes"}};
    for (const auto& [var, key] : env) {
      if (const char* v = std::getenv(var)) merged.Set(key, v);
    }
  }
  ServingConfig c;
  c.host = merged.GetString("host", c.host);
  const long long port = merged.GetInt("port", c.port);
  if (port < 0 || port > 65535) throw ConfigError("key 'port': out of range");
  c.port = static_cast<int>(port);
  c.payload_path = merged.GetString("payload_path", "");
  c.fallback_path = merged.GetString("fallback_path", "");
  const long long bytes = merged.GetInt("max_request_bytes", static_cast<long long>(c.max_request_bytes));
  if (bytes <= 0) throw ConfigError("key 'max_request_bytes': must be > 0");
  c.max_request_bytes = static_cast<std::size_t>(bytes);
  const long long contests = merged.GetInt("max_contests", static_cast<long long>(c.max_contests));
  if (contests <= 0) throw ConfigError("key 'max_contests': must be > 0");
  c.max_contests = static_cast<std::size_t>(contests);
  return c;
}

RankingServer::RankingServer(const OnlineStore& store, ServingConfig config)
    : store_(store), config_(std::move(config)) {}

RankingServer::~RankingServer() { Stop(); }

void RankingServer::Bind() {
  server_ = std::make_unique<httplib::Server>();
  server_->set_payload_max_length(config_.max_request_bytes);
  const std::size_t max_bytes = config_.max_request_bytes;
  const std::size_t max_contests = config_.max_contests;
  const OnlineStore& store = store_;
  server_->Post("/rank", [&store, max_bytes, max_contests](const httplib::Request& req,
                                                          httplib::Response& res) {
    if (req.body.size() > max_bytes) {
      res.status = 413;
      res.set_content(Json{{"error", "request body too large"}}.dump(), "application/json");
      return;
    }
    try {
      res.set_content(HandleRankBody(store, req.body, max_contests), "application/json");
    } catch (const RequestError& e) {
      res.status = 400;
      res.set_content(Json{{"error", e.what()}}.dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(Json{{"error", e.what()}}.dump(), "application/json");
    }
  });
  server_->Get("/health", [&store](const httplib::Request&, httplib::Response& res) {
    res.set_content(Json{{"status", "ok"},
                         {"model_version", store.model_version()},
                         {"payload_count", store.size()}}
                        .dump(),
                    "application/json");
  });
  if (config_.port == 0) {
    bound_port_ = server_->bind_to_any_port(config_.host);
    if (bound_port_ < 0) throw Error("cannot bind " + config_.host + " on an ephemeral port");
  } else {
    if (!server_->bind_to_port(config_.host, config_.port)) {
      throw Error("cannot bind " + config_.host + ":" + std::to_string(config_.port));
    }
    bound_port_ = config_.port;
  }
}

void RankingServer::Start() {
  Bind();
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void RankingServer::Run() {
  Bind();
  server_->listen_after_bind();
}

void RankingServer::Stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace widir
