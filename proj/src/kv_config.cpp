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

#include "widir/kv_config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "widir/error.hpp"

namespace widir {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

KeyValueConfig KeyValueConfig::Parse(std::string_view text, std::string_view origin) {
  KeyValueConfig config;
  config.origin_ = std::string(origin);
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = Trim(line);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key(Trim(line.substr(0, eq)));
    if (key.empty()) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": empty key");
    }
    if (config.values_.contains(key)) {
      throw ConfigError(std::string(origin) + ": duplicate key '" + key + "'");
    }
    config.values_[key] = std::string(Trim(line.substr(eq + 1)));
  }
  return config;
}

KeyValueConfig KeyValueConfig::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str(), path.string());
}

void KeyValueConfig::RequireKnownKeys(const std::set<std::string>& allowed) const {
  for (const auto& [key, value] : values_) {
    if (!allowed.contains(key)) {
      throw ConfigError(origin_ + ": unknown config key '" + key + "'");
    }
  }
}

std::string KeyValueConfig::GetString(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::GetDouble(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  char* end = nullptr;
  const double v = std::strtod(it->second.c_str(), &end);
  if (it->second.empty() || *end != '\0') {
    throw ConfigError(origin_ + ": key '" + key + "' expects a number, got '" + it->second + "'");
  }
  return v;
}

long long KeyValueConfig::GetInt(const std::string& key, long long fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  char* end = nullptr;
  const long long v = std::strtoll(it->second.c_str(), &end, 10);
  if (it->second.empty() || *end != '\0') {
    throw ConfigError(origin_ + ": key '" + key + "' expects an integer, got '" + it->second +
                      "'");
  }
  return v;
}

bool KeyValueConfig::GetBool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ConfigError(origin_ + ": key '" + key + "' expects true/false, got '" + it->second + "'");
}

std::string KeyValueConfig::Serialize() const {
  std::string out;
  for (const auto& [key, value] : values_) out += key + " = " + value + "\n";
  return out;
}

}  // namespace widir
