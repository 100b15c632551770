/*
 * Copyright 2026 The playgraph Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "playgraph/error.hpp"

namespace playgraph {

enum class Team { offense, defense, t, ct };
enum class Sport { nfl, csgo };

inline constexpr std::size_t kNflPlayers = 22;
inline constexpr std::size_t kNflDefenders = 11;
inline constexpr std::size_t kCsgoPlayers = 10;

inline std::string to_string(Team t) {
  switch (t) {
    case Team::offense: return "offense";
    case Team::defense: return "defense";
    case Team::t: return "T";
    case Team::ct: return "CT";
  }
  return "?";
}

inline std::optional<Team> parse_team(std::string_view s) {
  if (s == "offense") return Team::offense;
  if (s == "defense") return Team::defense;
  if (s == "T" || s == "t") return Team::t;
  if (s == "CT" || s == "ct") return Team::ct;
  return std::nullopt;
}

inline std::string to_string(Sport s) { return s == Sport::nfl ? "nfl" : "csgo"; }

using Position = std::array<double, 3>;

inline double distance(const Position& a, const Position& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// Everything known about one player at one instant. Fields that do not apply
/// to a sport keep their defaults.
struct PlayerRecord {
  std::string player_id;
  Team team = Team::offense;
  Position position{0.0, 0.0, 0.0};
  /// 2 for field sports (z ignored and kept 0), 3 for CSGO.
  int dims = 2;
  double velocity = 0.0;
  double displacement = 0.0;
  bool alive = true;
  bool is_ball_carrier = false;
  double hp = 0.0;
  double armor = 0.0;
  double equipment_value = 0.0;
  int grenades = 0;
  bool has_helmet = false;
  bool has_defuse_kit = false;
  int zone_id = 0;

  friend bool operator==(const PlayerRecord&, const PlayerRecord&) = default;
};

/// Ordered named global features z_t.
class GlobalFeatures {
 public:
  GlobalFeatures() = default;
  GlobalFeatures(std::initializer_list<std::pair<std::string, double>> init)
      : entries_(init) {}

  void set(const std::string& name, double value) {
    for (auto& [k, v] : entries_)
      if (k == name) {
        v = value;
        return;
      }
    entries_.emplace_back(name, value);
  }
  std::optional<double> find(std::string_view name) const {
    for (const auto& [k, v] : entries_)
      if (k == name) return v;
    return std::nullopt;
  }
  /// Throws DataError naming the missing key.
  double at(std::string_view name) const {
    if (auto v = find(name)) return *v;
    throw DataError("missing global feature", DataError::npos,
                    "global." + std::string(name));
  }
  const std::vector<std::pair<std::string, double>>& entries() const { return entries_; }

  friend bool operator==(const GlobalFeatures&, const GlobalFeatures&) = default;

 private:
  std::vector<std::pair<std::string, double>> entries_;
};

/// S_t = {z_t, X_t}. The player list is an unordered set; its order carries
/// no meaning.
struct GameState {
  double t = 0.0;
  GlobalFeatures global;
  std::vector<PlayerRecord> players;
  /// Yards gained (NFL) or 1 if CT wins the round (CSGO).
  std::optional<double> outcome;
  std::string partition_key;
  /// Play or round identifier used for grouped splits; empty means the state
  /// is its own group.
  std::string group;

  friend bool operator==(const GameState&, const GameState&) = default;

  const PlayerRecord* find_player(std::string_view id) const {
    for (const auto& p : players)
      if (p.player_id == id) return &p;
    return nullptr;
  }
  PlayerRecord* find_player(std::string_view id) {
    for (auto& p : players)
      if (p.player_id == id) return &p;
    return nullptr;
  }
};

/// Sport implied by the team labels. Throws DataError for mixed or empty sets.
inline Sport sport_of(const GameState& s) {
  if (s.players.empty()) throw DataError("state has no players", DataError::npos, "players");
  bool field = false, esport = false;
  for (const auto& p : s.players) {
    (p.team == Team::offense || p.team == Team::defense ? field : esport) = true;
  }
  if (field && esport)
    throw DataError("state mixes offense/defense with T/CT teams", DataError::npos, "team");
  return field ? Sport::nfl : Sport::csgo;
}

inline const PlayerRecord& ball_carrier(const GameState& s) {
  const PlayerRecord* found = nullptr;
  for (const auto& p : s.players) {
    if (!p.is_ball_carrier) continue;
    if (found) throw DataError("more than one ball-carrier", DataError::npos, "is_ball_carrier");
    found = &p;
  }
  if (!found) throw DataError("no ball-carrier", DataError::npos, "is_ball_carrier");
  return *found;
}

struct Diagnostic {
  std::string field;
  std::string message;
};

struct ValidationOptions {
  bool require_outcome = false;
};

/// Checks the per-sport rules. Returns an empty list for a valid state.
inline std::vector<Diagnostic> validate_state(const GameState& s,
                                              ValidationOptions opt = {}) {
  std::vector<Diagnostic> out;
  auto add = [&](std::string f, std::string m) { out.push_back({std::move(f), std::move(m)}); };

  if (!std::isfinite(s.t)) add("t", "timestamp is not finite");
  for (const auto& [k, v] : s.global.entries())
    if (!std::isfinite(v)) add("global." + k, "value is not finite");
  if (s.players.empty()) {
    add("players", "state has no players");
    return out;
  }

  Sport sport;
  try {
    sport = sport_of(s);
  } catch (const DataError& e) {
    add(e.field(), "state mixes offense/defense with T/CT teams");
    return out;
  }

  std::set<std::string> ids;
  for (std::size_t i = 0; i < s.players.size(); ++i) {
    const auto& p = s.players[i];
    const std::string at = "players[" + std::to_string(i) + "].";
    if (p.player_id.empty()) add(at + "player_id", "empty player id");
    if (!ids.insert(p.player_id).second)
      add(at + "player_id", "duplicate player id '" + p.player_id + "'");
    if (p.dims != 2 && p.dims != 3) add(at + "position", "position must have 2 or 3 coordinates");
    for (double c : p.position)
      if (!std::isfinite(c)) add(at + "position", "coordinate is not finite");
    for (auto [name, v] : {std::pair<const char*, double>{"velocity", p.velocity},
                           {"displacement", p.displacement},
                           {"hp", p.hp},
                           {"armor", p.armor},
                           {"equipment_value", p.equipment_value}}) {
      if (!std::isfinite(v)) add(at + name, "value is not finite");
    }
    if (p.hp < 0.0) add(at + "hp", "hp must be >= 0");
    if (p.armor < 0.0) add(at + "armor", "armor must be >= 0");
    if (p.equipment_value < 0.0) add(at + "equipment_value", "equipment_value must be >= 0");
    if (p.grenades < 0) add(at + "grenades", "grenades must be >= 0");
    if (!p.alive && p.hp != 0.0) add(at + "hp", "dead player must have hp == 0");
  }

  if (sport == Sport::nfl) {
    if (s.players.size() != kNflPlayers)
      add("players", "NFL states need exactly 22 players, got " +
                         std::to_string(s.players.size()));
    std::size_t carriers = 0, defenders = 0;
    for (const auto& p : s.players) {
      carriers += p.is_ball_carrier ? 1 : 0;
      defenders += p.team == Team::defense ? 1 : 0;
      if (p.is_ball_carrier && p.team != Team::offense)
        add("is_ball_carrier", "ball-carrier must be on offense");
    }
    if (carriers != 1)
      add("is_ball_carrier", "NFL states need exactly one ball-carrier, got " +
                                 std::to_string(carriers));
    if (defenders != kNflDefenders)
      add("team", "NFL states need exactly 11 defenders, got " + std::to_string(defenders));
  } else {
    if (s.players.size() != kCsgoPlayers)
      add("players", "CSGO states need exactly 10 players, got " +
                         std::to_string(s.players.size()));
    for (const auto& p : s.players)
      if (p.is_ball_carrier) add("is_ball_carrier", "CSGO players cannot carry a ball");
  }

  if (s.outcome) {
    if (!std::isfinite(*s.outcome)) add("outcome", "outcome is not finite");
    if (sport == Sport::csgo && *s.outcome != 0.0 && *s.outcome != 1.0)
      add("outcome", "CSGO outcome must be 0 or 1");
  } else if (opt.require_outcome) {
    add("outcome", "training states need an outcome");
  }
  return out;
}

/// Throws ValidationError carrying the first diagnostic.
inline void require_valid(const GameState& s, ValidationOptions opt = {},
                          std::size_t record = DataError::npos) {
  const auto diags = validate_state(s, opt);
  if (!diags.empty()) throw ValidationError(diags.front().message, record, diags.front().field);
}

}  // namespace playgraph
