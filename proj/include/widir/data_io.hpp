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
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "widir/domain.hpp"

namespace widir {

// Tab-separated, newline-delimited text records.
std::string FormatJoin(const JoinRecord& join);
JoinRecord ParseJoin(std::string_view line);

// Tiers as "from-to:prize" separated by ';'.
std::string FormatPrizeDistribution(const PrizeDistribution& d);
PrizeDistribution ParsePrizeDistribution(std::string_view text);

std::string FormatContest(const ContestSpec& spec);
ContestSpec ParseContest(std::string_view line);

std::string FormatMatch(const MatchRecord& match);
MatchRecord ParseMatch(std::string_view line);

std::string FormatPlayer(const PlayerProfile& player);
PlayerProfile ParsePlayer(std::string_view line);

void WriteJoins(const std::filesystem::path& path, const std::vector<JoinRecord>& joins);
std::vector<JoinRecord> ReadJoins(const std::filesystem::path& path);
void WriteContests(const std::filesystem::path& path, const std::vector<ContestSpec>& contests);
std::vector<ContestSpec> ReadContests(const std::filesystem::path& path);
void WriteMatches(const std::filesystem::path& path, const std::vector<MatchRecord>& matches);
std::vector<MatchRecord> ReadMatches(const std::filesystem::path& path);
void WritePlayers(const std::filesystem::path& path, const std::vector<PlayerProfile>& players);
std::vector<PlayerProfile> ReadPlayers(const std::filesystem::path& path);

struct DatasetPaths {
  std::filesystem::path contests;
  std::filesystem::path matches;
  std::filesystem::path joins;
  std::filesystem::path players;

  static DatasetPaths InDirectory(const std::filesystem::path& dir);
};

void WriteDataset(const DatasetPaths& paths, const Dataset& data);
Dataset ReadDataset(const DatasetPaths& paths);

// Shared helpers for the text formats.
std::vector<std::string_view> SplitFields(std::string_view line, char sep);
std::string FormatDouble(double v);
// Shortest-ish form for config files (%.10g).
std::string FormatDoubleShort(double v);
double ParseDouble(std::string_view text);
long long ParseInt(std::string_view text);
std::string ReadFile(const std::filesystem::path& path);
// Writes to a sibling temp file and renames over the target.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view content);

}  // namespace widir
