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

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>

namespace widir {

// Flat `key = value` text files. '#' starts a comment line.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig Parse(std::string_view text, std::string_view origin = "<string>");
  static KeyValueConfig Load(const std::filesystem::path& path);

  // Throws ConfigError naming the first key not in `allowed`.
  void RequireKnownKeys(const std::set<std::string>& allowed) const;

  bool Has(const std::string& key) const { return values_.contains(key); }
  void Set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  std::string GetString(const std::string& key, const std::string& fallback) const;
  double GetDouble(const std::string& key, double fallback) const;
  long long GetInt(const std::string& key, long long fallback) const;
  bool GetBool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  std::string Serialize() const;

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

}  // namespace widir
