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

#include "widir/data_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "widir/error.hpp"

namespace widir {
namespace {

template <typename T, typename Parse>
std::vector<T> ReadLines(const std::filesystem::path& path, Parse parse) {
  const std::string text = ReadFile(path);
  std::vector<T> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    try {
      out.push_back(parse(line));
    } catch (const std::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

template <typename T, typename Format>
void WriteLines(const std::filesystem::path& path, const std::vector<T>& items, Format format) {
  std::string text;
  for (const T& item : items) {
    text += format(item);
    text += '\n';
  }
  WriteFileAtomic(path, text);
}

void ExpectFields(const std::vector<std::string_view>& f, std::size_t n, const char* what) {
  if (f.size() != n) {
    throw std::invalid_argument(std::string(what) + " record needs " + std::to_string(n) +
                                " fields, got " + std::to_string(f.size()));
  }
}

bool ParseFlag(std::string_view s) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw std::invalid_argument("bad flag '" + std::string(s) + "'");
}

}  // namespace

std::vector<std::string_view> SplitFields(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t p = line.find(sep, start);
    if (p == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, p - start));
    start = p + 1;
  }
}

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string FormatDoubleShort(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double ParseDouble(std::string_view text) {
  const std::string s(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

long long ParseInt(std::string_view text) {
  const std::string s(text);
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0') throw std::invalid_argument("bad integer '" + s + "'");
  return v;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFileAtomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string FormatJoin(const JoinRecord& j) {
  return j.player_id + '\t' + j.contest_id + '\t' + j.match_id + '\t' +
         FormatTimestamp(j.joining_time) + '\t' + j.entry_fee_paid.ToString() + '\t' +
         j.prize_won.ToString();
}

JoinRecord ParseJoin(std::string_view line) {
  const auto f = SplitFields(line, '\t');
  ExpectFields(f, 6, "join");
  JoinRecord j;
  j.player_id = f[0];
  j.contest_id = f[1];
  j.match_id = f[2];
  j.joining_time = ParseTimestamp(f[3]);
  j.entry_fee_paid = Money::Parse(f[4]);
  j.prize_won = Money::Parse(f[5]);
  return j;
}

std::string FormatPrizeDistribution(const PrizeDistribution& d) {
  std::string out;
  for (std::size_t i = 0; i < d.tiers.size(); ++i) {
    if (i > 0) out += ';';
    const PrizeTier& t = d.tiers[i];
    out += std::to_string(t.rank_from) + '-' + std::to_string(t.rank_to) + ':' +
           t.prize_per_rank.ToString();
  }
  return out;
}

PrizeDistribution ParsePrizeDistribution(std::string_view text) {
  PrizeDistribution d;
  if (text.empty()) return d;
  for (std::string_view item : SplitFields(text, ';')) {
    const std::size_t dash = item.find('-');
    const std::size_t colon = item.find(':');
    if (dash == std::string_view::npos || colon == std::string_view::npos || colon < dash) {
      throw std::invalid_argument("bad prize tier '" + std::string(item) + "'");
    }
    PrizeTier t;
    t.rank_from = static_cast<int>(ParseInt(item.substr(0, dash)));
    t.rank_to = static_cast<int>(ParseInt(item.substr(dash + 1, colon - dash - 1)));
    t.prize_per_rank = Money::Parse(item.substr(colon + 1));
    d.tiers.push_back(t);
  }
  return d;
}

std::string FormatContest(const ContestSpec& c) {
  return c.contest_id + '\t' + c.template_id + '\t' + c.match_id + '\t' + c.entry_fee.ToString() +
         '\t' + c.prize_money.ToString() + '\t' + std::to_string(c.contest_size) + '\t' +
         std::string(ContestTypeName(c.contest_type)) + '\t' +
         FormatPrizeDistribution(c.prize_distribution) + '\t' + (c.guaranteed ? "1" : "0") +
         '\t' + (c.multi_entry ? "1" : "0");
}

ContestSpec ParseContest(std::string_view line) {
  const auto f = SplitFields(line, '\t');
  ExpectFields(f, 10, "contest");
  ContestSpec c;
  c.contest_id = f[0];
  c.template_id = f[1];
  c.match_id = f[2];
  c.entry_fee = Money::Parse(f[3]);
  c.prize_money = Money::Parse(f[4]);
  c.contest_size = static_cast<int>(ParseInt(f[5]));
  c.contest_type = ParseContestType(f[6]);
  c.prize_distribution = ParsePrizeDistribution(f[7]);
  c.guaranteed = ParseFlag(f[8]);
  c.multi_entry = ParseFlag(f[9]);
  return c;
}

std::string FormatMatch(const MatchRecord& m) {
  std::string out = m.match_id + '\t' + FormatTimestamp(m.start_time) + '\t';
  for (std::size_t i = 0; i < m.contest_ids.size(); ++i) {
    if (i > 0) out += ',';
    out += m.contest_ids[i];
  }
  return out;
}

MatchRecord ParseMatch(std::string_view line) {
  const auto f = SplitFields(line, '\t');
  ExpectFields(f, 3, "match");
  MatchRecord m;
  m.match_id = f[0];
  m.start_time = ParseTimestamp(f[1]);
  if (!f[2].empty()) {
    for (std::string_view id : SplitFields(f[2], ',')) m.contest_ids.emplace_back(id);
  }
  return m;
}

std::string FormatPlayer(const PlayerProfile& p) {
  const PlayerArchetype& a = p.archetype;
  return p.player_id + '\t' + FormatDouble(a.preferred_log_entry_fee) + '\t' +
         FormatDouble(a.fee_sensitivity) + '\t' + FormatDouble(a.size_preference) + '\t' +
         FormatDouble(a.risk_appetite) + '\t' + FormatDouble(a.popularity_weight) + '\t' +
         FormatDouble(a.activity_rate) + '\t' + FormatDouble(a.multi_entry_propensity);
}

PlayerProfile ParsePlayer(std::string_view line) {
  const auto f = SplitFields(line, '\t');
  ExpectFields(f, 8, "player");
  PlayerProfile p;
  p.player_id = f[0];
  p.archetype.preferred_log_entry_fee = ParseDouble(f[1]);
  p.archetype.fee_sensitivity = ParseDouble(f[2]);
  p.archetype.size_preference = ParseDouble(f[3]);
  p.archetype.risk_appetite = ParseDouble(f[4]);
  p.archetype.popularity_weight = ParseDouble(f[5]);
  p.archetype.activity_rate = ParseDouble(f[6]);
  p.archetype.multi_entry_propensity = ParseDouble(f[7]);
  return p;
}

void WriteJoins(const std::filesystem::path& path, const std::vector<JoinRecord>& joins) {
  WriteLines(path, joins, FormatJoin);
}
std::vector<JoinRecord> ReadJoins(const std::filesystem::path& path) {
  return ReadLines<JoinRecord>(path, ParseJoin);
}
void WriteContests(const std::filesystem::path& path, const std::vector<ContestSpec>& contests) {
  WriteLines(path, contests, FormatContest);
}
std::vector<ContestSpec> ReadContests(const std::filesystem::path& path) {
  return ReadLines<ContestSpec>(path, ParseContest);
}
void WriteMatches(const std::filesystem::path& path, const std::vector<MatchRecord>& matches) {
  WriteLines(path, matches, FormatMatch);
}
std::vector<MatchRecord> ReadMatches(const std::filesystem::path& path) {
  return ReadLines<MatchRecord>(path, ParseMatch);
}
void WritePlayers(const std::filesystem::path& path, const std::vector<PlayerProfile>& players) {
  WriteLines(path, players, FormatPlayer);
}
std::vector<PlayerProfile> ReadPlayers(const std::filesystem::path& path) {
  return ReadLines<PlayerProfile>(path, ParsePlayer);
}

DatasetPaths DatasetPaths::InDirectory(const std::filesystem::path& dir) {
  return {dir / "contests.tsv", dir / "matches.tsv", dir / "joins.tsv", dir / "players.tsv"};
}

void WriteDataset(const DatasetPaths& paths, const Dataset& data) {
  WriteContests(paths.contests, data.contests);
  WriteMatches(paths.matches, data.matches);
  WriteJoins(paths.joins, data.joins);
  WritePlayers(paths.players, data.players);
}

Dataset ReadDataset(const DatasetPaths& paths) {
  Dataset d;
  d.contests = ReadContests(paths.contests);
  d.matches = ReadMatches(paths.matches);
  d.joins = ReadJoins(paths.joins);
  d.players = ReadPlayers(paths.players);
  return d;
}

}  // namespace widir
