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

// Newline-delimited JSON game states. Field names are documented in SCHEMA.md.

#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "playgraph/game_state.hpp"

namespace playgraph {

using Json = nlohmann::ordered_json;

struct ParseOptions {
  /// Reject unknown keys instead of warning about them.
  bool strict = false;
  /// Receives non-fatal warnings; defaults to standard error.
  std::function<void(const std::string&)> warn;
  ValidationOptions validation;
};

namespace detail {

inline void emit_warning(const ParseOptions& opt, const std::string& msg) {
  if (opt.warn)
    opt.warn(msg);
  else
    std::cerr << "warning: " << msg << "\n";
}

inline void check_keys(const Json& obj, std::initializer_list<const char*> known,
                       const std::string& where, const ParseOptions& opt, std::size_t record) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (ok) continue;
    if (opt.strict) throw DataError("unknown key", record, where + it.key());
    emit_warning(opt, "record " + std::to_string(record) + ": ignoring unknown key '" + where +
                          it.key() + "'");
  }
}

inline double get_number(const Json& obj, const char* key, const std::string& where,
                         std::size_t record, std::optional<double> fallback = std::nullopt) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (fallback) return *fallback;
    throw DataError("required field is missing", record, where + key);
  }
  if (!it->is_number()) throw DataError("expected a number", record, where + key);
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw DataError("value is not finite", record, where + key);
  return v;
}

inline bool get_bool(const Json& obj, const char* key, const std::string& where,
                     std::size_t record, bool fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) throw DataError("expected true or false", record, where + key);
  return it->get<bool>();
}

inline int get_int(const Json& obj, const char* key, const std::string& where,
                   std::size_t record, int fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer()) throw DataError("expected an integer", record, where + key);
  return it->get<int>();
}

}  // namespace detail

inline Json to_json(const PlayerRecord& p) {
  Json j;
  j["player_id"] = p.player_id;
  j["team"] = to_string(p.team);
  Json pos = Json::array({p.position[0], p.position[1]});
  if (p.dims == 3) pos.push_back(p.position[2]);
  j["position"] = pos;
  j["velocity"] = p.velocity;
  j["displacement"] = p.displacement;
  j["alive"] = p.alive;
  j["is_ball_carrier"] = p.is_ball_carrier;
  j["hp"] = p.hp;
  j["armor"] = p.armor;
  j["equipment_value"] = p.equipment_value;
  j["grenades"] = p.grenades;
  j["has_helmet"] = p.has_helmet;
  j["has_defuse_kit"] = p.has_defuse_kit;
  j["zone_id"] = p.zone_id;
  return j;
}

inline PlayerRecord player_from_json(const Json& j, std::size_t record, const std::string& where,
                                     const ParseOptions& opt = {}) {
  if (!j.is_object()) throw DataError("player must be an object", record, where);
  detail::check_keys(j,
                     {"player_id", "team", "position", "velocity", "displacement", "alive",
                      "is_ball_carrier", "hp", "armor", "equipment_value", "grenades",
                      "has_helmet", "has_defuse_kit", "zone_id"},
                     where, opt, record);
  PlayerRecord p;
  auto id = j.find("player_id");
  if (id == j.end() || !id->is_string())
    throw DataError("player_id must be a string", record, where + "player_id");
  p.player_id = id->get<std::string>();
  auto team = j.find("team");
  if (team == j.end() || !team->is_string())
    throw DataError("team must be a string", record, where + "team");
  auto t = parse_team(team->get<std::string>());
  if (!t) throw DataError("team must be offense, defense, T or CT", record, where + "team");
  p.team = *t;
  auto pos = j.find("position");
  if (pos == j.end() || !pos->is_array() || pos->size() < 2 || pos->size() > 3)
    throw DataError("position must be an array of 2 or 3 numbers", record, where + "position");
  p.dims = static_cast<int>(pos->size());
  for (std::size_t i = 0; i < pos->size(); ++i) {
    if (!(*pos)[i].is_number()) throw DataError("expected a number", record, where + "position");
    p.position[i] = (*pos)[i].get<double>();
    if (!std::isfinite(p.position[i]))
      throw DataError("coordinate is not finite", record, where + "position");
  }
  p.velocity = detail::get_number(j, "velocity", where, record, 0.0);
  p.displacement = detail::get_number(j, "displacement", where, record, 0.0);
  p.alive = detail::get_bool(j, "alive", where, record, true);
  p.is_ball_carrier = detail::get_bool(j, "is_ball_carrier", where, record, false);
  p.hp = detail::get_number(j, "hp", where, record, 0.0);
  p.armor = detail::get_number(j, "armor", where, record, 0.0);
  p.equipment_value = detail::get_number(j, "equipment_value", where, record, 0.0);
  p.grenades = detail::get_int(j, "grenades", where, record, 0);
  p.has_helmet = detail::get_bool(j, "has_helmet", where, record, false);
  p.has_defuse_kit = detail::get_bool(j, "has_defuse_kit", where, record, false);
  p.zone_id = detail::get_int(j, "zone_id", where, record, 0);
  return p;
}

inline Json to_json(const GameState& s) {
  Json j;
  j["t"] = s.t;
  Json g = Json::object();
  for (const auto& [k, v] : s.global.entries()) g[k] = v;
  j["global"] = g;
  Json players = Json::array();
  for (const auto& p : s.players) players.push_back(to_json(p));
  j["players"] = players;
  j["outcome"] = s.outcome ? Json(*s.outcome) : Json(nullptr);
  j["partition_key"] = s.partition_key;
  if (!s.group.empty()) j["group"] = s.group;
  return j;
}

/// Parses and validates one state object.
inline GameState state_from_json(const Json& j, std::size_t record = 0,
                                 const ParseOptions& opt = {}) {
  if (!j.is_object()) throw DataError("state must be a JSON object", record);
  detail::check_keys(j, {"t", "global", "players", "outcome", "partition_key", "group"}, "",
                     opt, record);
  GameState s;
  s.t = detail::get_number(j, "t", "", record, 0.0);
  if (auto g = j.find("global"); g != j.end()) {
    if (!g->is_object()) throw DataError("global must be an object", record, "global");
    for (auto it = g->begin(); it != g->end(); ++it) {
      if (it.value().is_boolean()) {
        s.global.set(it.key(), it.value().get<bool>() ? 1.0 : 0.0);
        continue;
      }
      if (!it.value().is_number())
        throw DataError("expected a number", record, "global." + it.key());
      s.global.set(it.key(), it.value().get<double>());
    }
  }
  auto players = j.find("players");
  if (players == j.end() || !players->is_array())
    throw DataError("players must be an array", record, "players");
  for (std::size_t i = 0; i < players->size(); ++i)
    s.players.push_back(
        player_from_json((*players)[i], record, "players[" + std::to_string(i) + "].", opt));
  if (auto o = j.find("outcome"); o != j.end() && !o->is_null()) {
    if (o->is_boolean())
      s.outcome = o->get<bool>() ? 1.0 : 0.0;
    else if (o->is_number())
      s.outcome = o->get<double>();
    else
      throw DataError("outcome must be a number, boolean or null", record, "outcome");
  }
  if (auto k = j.find("partition_key"); k != j.end()) {
    if (!k->is_string()) throw DataError("partition_key must be a string", record, "partition_key");
    s.partition_key = k->get<std::string>();
  }
  if (auto k = j.find("group"); k != j.end()) {
    if (!k->is_string()) throw DataError("group must be a string", record, "group");
    s.group = k->get<std::string>();
  }
  require_valid(s, opt.validation, record);
  return s;
}

/// Reads newline-delimited JSON. Blank lines are skipped; records are
/// numbered from 0 in file order.
inline std::vector<GameState> read_states(std::istream& in, const ParseOptions& opt = {}) {
  std::vector<GameState> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw DataError("line " + std::to_string(line_no) + ": malformed JSON (" + e.what() + ")",
                      out.size());
    }
    try {
      out.push_back(state_from_json(j, out.size(), opt));
    } catch (const ValidationError& e) {
      throw e.with_prefix("line " + std::to_string(line_no) + ": ");
    } catch (const DataError& e) {
      throw e.with_prefix("line " + std::to_string(line_no) + ": ");
    }
  }
  return out;
}

inline std::vector<GameState> load_states(const std::string& path, const ParseOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_states(in, opt);
}

inline void write_states(std::ostream& out, const std::vector<GameState>& states) {
  for (const auto& s : states) out << to_json(s).dump() << "\n";
}

inline void save_states(const std::string& path, const std::vector<GameState>& states) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_states(out, states);
}

}  // namespace playgraph
