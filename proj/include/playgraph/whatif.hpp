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

// Counterfactual queries: edit one player, re-predict, report the change.
// Derived features are never patched in place; the perturbed state goes
// through the same featurizers as the baseline.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "playgraph/model.hpp"
#include "playgraph/state_io.hpp"
#include "playgraph/synthetic.hpp"
#include "playgraph/training.hpp"

namespace playgraph {

struct SetPosition {
  Position coords{0.0, 0.0, 0.0};
};
struct CircleMove {
  std::string anchor_id;
  double angle = 0.0;  // radians, counter-clockwise in the x-y plane
};
struct SetAttribute {
  std::string name;
  double value = 0.0;
};

struct Perturbation {
  std::string player_id;
  std::variant<SetPosition, CircleMove, SetAttribute> change;
};

/// Axis-aligned playing area in the x-y plane.
struct FieldBounds {
  double x_min = 0.0, x_max = kFieldLength;
  double y_min = 0.0, y_max = kFieldWidth;

  bool contains(const Position& p) const {
    return p[0] >= x_min && p[0] <= x_max && p[1] >= y_min && p[1] <= y_max;
  }
  Position clamp(Position p) const {
    p[0] = std::clamp(p[0], x_min, x_max);
    p[1] = std::clamp(p[1], y_min, y_max);
    return p;
  }
};

inline FieldBounds default_bounds(Sport s) {
  if (s == Sport::nfl) return {};
  return {0.0, kMapSize, 0.0, kMapSize};
}

/// Attribute names accepted by set_attribute.
inline const std::vector<std::string>& editable_attributes() {
  static const std::vector<std::string> names{
      "velocity", "displacement", "alive",    "is_ball_carrier", "hp",     "armor",
      "equipment_value", "grenades", "has_helmet", "has_defuse_kit", "zone_id"};
  return names;
}

/// Rotates `player_id` about `anchor_id` by `angle` in the ground plane.
/// z is left as is.
inline GameState circle_move(const GameState& s, const std::string& player_id,
                             const std::string& anchor_id, double angle) {
  if (player_id == anchor_id)
    throw ValidationError("player cannot orbit itself", DataError::npos, "anchor_id");
  GameState out = s;
  PlayerRecord* p = out.find_player(player_id);
  if (!p) throw ValidationError("unknown player '" + player_id + "'", DataError::npos, "player_id");
  const PlayerRecord* a = out.find_player(anchor_id);
  if (!a) throw ValidationError("unknown player '" + anchor_id + "'", DataError::npos, "anchor_id");
  const double dx = p->position[0] - a->position[0];
  const double dy = p->position[1] - a->position[1];
  if (dx == 0.0 && dy == 0.0)
    throw ValidationError("player and anchor coincide; radius is zero", DataError::npos,
                          "anchor_id");
  const double c = std::cos(angle), sn = std::sin(angle);
  p->position[0] = a->position[0] + c * dx - sn * dy;
  p->position[1] = a->position[1] + sn * dx + c * dy;
  return out;
}

namespace detail {

inline void set_attribute(PlayerRecord& p, const std::string& name, double v) {
  if (!std::isfinite(v)) throw ValidationError("value is not finite", DataError::npos, name);
  auto as_int = [&](int& dst) {
    if (v != std::floor(v)) throw ValidationError("expected an integer", DataError::npos, name);
    dst = static_cast<int>(v);
  };
  if (name == "velocity") p.velocity = v;
  else if (name == "displacement") p.displacement = v;
  else if (name == "alive") {
    p.alive = v != 0.0;
    if (!p.alive) p.hp = 0.0;
  } else if (name == "is_ball_carrier") p.is_ball_carrier = v != 0.0;
  else if (name == "hp") {
    p.hp = v;
    // dead players have hp 0 and vice versa
    if (v == 0.0) p.alive = false;
    else if (v > 0.0) p.alive = true;
  } else if (name == "armor") p.armor = v;
  else if (name == "equipment_value") p.equipment_value = v;
  else if (name == "grenades") as_int(p.grenades);
  else if (name == "has_helmet") p.has_helmet = v != 0.0;
  else if (name == "has_defuse_kit") p.has_defuse_kit = v != 0.0;
  else if (name == "zone_id") as_int(p.zone_id);
  else
    throw ValidationError("unknown attribute '" + name + "'", DataError::npos, "name");
}

}  // namespace detail

struct PerturbOptions {
  /// When set, positions outside these bounds are rejected.
  std::optional<FieldBounds> bounds;
};

/// Returns the edited copy. The result is re-validated, so an edit that
/// breaks a sport rule throws ValidationError.
inline GameState apply_perturbation(const GameState& s, const Perturbation& pert,
                                    const PerturbOptions& opt = {}) {
  GameState out;
  if (const auto* cm = std::get_if<CircleMove>(&pert.change)) {
    out = circle_move(s, pert.player_id, cm->anchor_id, cm->angle);
  } else {
    out = s;
    PlayerRecord* p = out.find_player(pert.player_id);
    if (!p)
      throw ValidationError("unknown player '" + pert.player_id + "'", DataError::npos,
                            "player_id");
    if (const auto* sp = std::get_if<SetPosition>(&pert.change)) {
      p->position[0] = sp->coords[0];
      p->position[1] = sp->coords[1];
      // field sports keep z at 0
      if (p->dims == 3) p->position[2] = sp->coords[2];
    } else {
      detail::set_attribute(*p, std::get<SetAttribute>(pert.change).name,
                            std::get<SetAttribute>(pert.change).value);
    }
  }
  if (opt.bounds) {
    const PlayerRecord* p = out.find_player(pert.player_id);
    if (!opt.bounds->contains(p->position))
      throw ValidationError("position is outside the field bounds", DataError::npos, "coords");
  }
  require_valid(out);
  return out;
}

// ---------------------------------------------------------------------------
// What-if

struct WhatIfResult {
  Prediction baseline;
  Prediction perturbed;
  double delta = 0.0;
  GameState perturbed_state;
  /// Carrier x plus predicted gain, for rushing models.
  std::optional<double> expected_end_line;
};

inline void require_compatible(const Model& m, const GameState& s) {
  require_task(m, task_for(sport_of(s)));
}

inline WhatIfResult what_if(const Model& m, const GameState& s, const Perturbation& p,
                            const PerturbOptions& opt = {}) {
  require_compatible(m, s);
  WhatIfResult r;
  r.baseline = predict(m, s);
  r.perturbed_state = apply_perturbation(s, p, opt);
  r.perturbed = predict(m, r.perturbed_state);
  r.delta = r.perturbed.value - r.baseline.value;
  if (sport_of(s) == Sport::nfl)
    r.expected_end_line = ball_carrier(r.perturbed_state).position[0] + r.perturbed.value;
  return r;
}

// ---------------------------------------------------------------------------
// Attention summaries

enum class AttentionReduction { column_mean, row_mean };

struct NodeAttention {
  std::string player_id;
  Team team = Team::offense;
  double value = 0.0;
};

struct AttentionSummary {
  AttentionReduction reduction = AttentionReduction::column_mean;
  std::size_t heads = 0;
  std::vector<NodeAttention> nodes;
  /// Mean node value per team, keyed by team name.
  std::map<std::string, double> team_means;
  double mean = 0.0;
};

/// Column means (incoming weight of each node, averaged over receivers) or
/// row means, then averaged over heads.
inline AttentionSummary attention_summary(const Prediction& pred,
                                          AttentionReduction reduction =
                                              AttentionReduction::column_mean) {
  if (pred.attention.empty())
    throw ContractError("attention_summary: prediction carries no attention (non-GAT model)");
  const std::size_t n = pred.node_order.size();
  AttentionSummary out;
  out.reduction = reduction;
  out.heads = pred.attention.size();
  std::vector<double> acc(n, 0.0);
  for (const Matrix& a : pred.attention) {
    if (a.rows() != n || a.cols() != n)
      throw ShapeError("attention_summary: matrix " + a.shape() + " for " + std::to_string(n) +
                       " nodes");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        acc[reduction == AttentionReduction::column_mean ? j : i] += a(i, j);
  }
  const double denom = static_cast<double>(n * pred.attention.size());
  std::map<std::string, std::pair<double, std::size_t>> teams;
  for (std::size_t k = 0; k < n; ++k) {
    NodeAttention na{pred.node_order[k], pred.node_teams[k], acc[k] / denom};
    out.mean += na.value;
    auto& t = teams[to_string(na.team)];
    t.first += na.value;
    t.second += 1;
    out.nodes.push_back(std::move(na));
  }
  out.mean /= static_cast<double>(n);
  for (const auto& [team, sum] : teams)
    out.team_means[team] = sum.first / static_cast<double>(sum.second);
  return out;
}

// ---------------------------------------------------------------------------
// Position sweep

struct SweepCell {
  std::size_t index = 0;  // position in the requested grid
  Position coords{0.0, 0.0, 0.0};
  double value = 0.0;
  double delta = 0.0;
};

/// Regular grid over [x0, x1] x [y0, y1] with nx * ny points, row-major in y.
struct GridSpec {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
  std::size_t nx = 1, ny = 1;
  double z = 0.0;
};

inline std::vector<Position> grid_points(const GridSpec& g) {
  if (g.nx == 0 || g.ny == 0) throw ContractError("grid needs nx, ny >= 1");
  std::vector<Position> out;
  for (std::size_t iy = 0; iy < g.ny; ++iy)
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      const double fx = g.nx == 1 ? 0.0 : static_cast<double>(ix) / static_cast<double>(g.nx - 1);
      const double fy = g.ny == 1 ? 0.0 : static_cast<double>(iy) / static_cast<double>(g.ny - 1);
      out.push_back({g.x0 + fx * (g.x1 - g.x0), g.y0 + fy * (g.y1 - g.y0), g.z});
    }
  return out;
}

/// Evaluates set_position at every grid point (clamped to `bounds`) and
/// returns cells ordered by value, highest first; ties keep grid order.
inline std::vector<SweepCell> position_sweep(const Model& m, const GameState& s,
                                             const std::string& player_id,
                                             std::span<const Position> grid,
                                             const FieldBounds& bounds) {
  if (grid.empty()) throw ContractError("position_sweep: empty grid");
  require_compatible(m, s);
  if (!s.find_player(player_id))
    throw ValidationError("unknown player '" + player_id + "'", DataError::npos, "player_id");
  const double base = predict(m, s).value;
  std::vector<SweepCell> cells;
  cells.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Position at = bounds.clamp(grid[i]);
    try {
      const GameState moved = apply_perturbation(s, {player_id, SetPosition{at}});
      const double v = predict(m, moved).value;
      cells.push_back({i, at, v, v - base});
    } catch (const Error& e) {
      throw Error("sweep cell " + std::to_string(i) + ": " + e.what());
    }
  }
  std::stable_sort(cells.begin(), cells.end(),
                   [](const SweepCell& a, const SweepCell& b) { return a.value > b.value; });
  return cells;
}

// ---------------------------------------------------------------------------
// JSON

inline Json to_json(const Matrix& a) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    Json r = Json::array();
    for (std::size_t j = 0; j < a.cols(); ++j) r.push_back(a(i, j));
    rows.push_back(r);
  }
  return rows;
}

inline Json to_json(const Prediction& p) {
  Json j;
  j["value"] = p.value;
  j["raw"] = p.raw;
  j["node_order"] = p.node_order;
  Json teams = Json::array();
  for (Team t : p.node_teams) teams.push_back(to_string(t));
  j["node_teams"] = teams;
  if (p.attention.empty()) {
    j["attention"] = nullptr;
  } else {
    Json heads = Json::array();
    for (const Matrix& a : p.attention) heads.push_back(to_json(a));
    j["attention"] = heads;
  }
  return j;
}

inline Json to_json(const AttentionSummary& s) {
  Json j;
  j["reduction"] = s.reduction == AttentionReduction::column_mean ? "column_mean" : "row_mean";
  j["heads"] = s.heads;
  Json nodes = Json::array();
  for (const auto& n : s.nodes)
    nodes.push_back({{"player_id", n.player_id}, {"team", to_string(n.team)}, {"value", n.value}});
  j["nodes"] = nodes;
  Json teams = Json::object();
  for (const auto& [k, v] : s.team_means) teams[k] = v;
  j["team_means"] = teams;
  j["mean"] = s.mean;
  return j;
}

inline Json to_json(const WhatIfResult& r) {
  Json j;
  j["baseline"] = to_json(r.baseline);
  j["perturbed"] = to_json(r.perturbed);
  j["delta"] = r.delta;
  j["perturbed_state"] = to_json(r.perturbed_state);
  j["expected_end_line"] = r.expected_end_line ? Json(*r.expected_end_line) : Json(nullptr);
  return j;
}

inline Json to_json(const SweepCell& c) {
  return {{"index", c.index},
          {"coords", Json::array({c.coords[0], c.coords[1], c.coords[2]})},
          {"value", c.value},
          {"delta", c.delta}};
}

/// Parses {"player_id": ..., "change": {"type": "set_position", ...}}.
inline Perturbation perturbation_from_json(const Json& j) {
  auto bad = [](const std::string& msg, const std::string& field) {
    return DataError(msg, DataError::npos, field);
  };
  if (!j.is_object()) throw bad("perturbation must be an object", "perturbation");
  Perturbation p;
  auto id = j.find("player_id");
  if (id == j.end() || !id->is_string()) throw bad("expected a string", "perturbation.player_id");
  p.player_id = id->get<std::string>();
  auto ch = j.find("change");
  if (ch == j.end() || !ch->is_object()) throw bad("expected an object", "perturbation.change");
  auto type = ch->find("type");
  if (type == ch->end() || !type->is_string())
    throw bad("expected a string", "perturbation.change.type");
  const std::string t = type->get<std::string>();
  auto number = [&](const char* key) {
    auto it = ch->find(key);
    if (it == ch->end() || !it->is_number())
      throw bad("expected a number", std::string("perturbation.change.") + key);
    return it->get<double>();
  };
  if (t == "set_position") {
    auto c = ch->find("coords");
    if (c == ch->end() || !c->is_array() || c->size() < 2 || c->size() > 3)
      throw bad("expected [x, y] or [x, y, z]", "perturbation.change.coords");
    SetPosition sp;
    for (std::size_t i = 0; i < c->size(); ++i) {
      if (!(*c)[i].is_number()) throw bad("expected a number", "perturbation.change.coords");
      sp.coords[i] = (*c)[i].get<double>();
    }
    p.change = sp;
  } else if (t == "circle_move") {
    auto a = ch->find("anchor_id");
    if (a == ch->end() || !a->is_string())
      throw bad("expected a string", "perturbation.change.anchor_id");
    p.change = CircleMove{a->get<std::string>(), number("angle")};
  } else if (t == "set_attribute") {
    auto n = ch->find("name");
    if (n == ch->end() || !n->is_string())
      throw bad("expected a string", "perturbation.change.name");
    auto v = ch->find("value");
    if (v == ch->end() || !(v->is_number() || v->is_boolean()))
      throw bad("expected a number or boolean", "perturbation.change.value");
    p.change = SetAttribute{n->get<std::string>(),
                            v->is_boolean() ? (v->get<bool>() ? 1.0 : 0.0) : v->get<double>()};
  } else {
    throw bad("unknown change type '" + t + "'", "perturbation.change.type");
  }
  return p;
}

inline Json to_json(const Perturbation& p) {
  Json ch;
  if (const auto* sp = std::get_if<SetPosition>(&p.change)) {
    ch = {{"type", "set_position"},
          {"coords", Json::array({sp->coords[0], sp->coords[1], sp->coords[2]})}};
  } else if (const auto* cm = std::get_if<CircleMove>(&p.change)) {
    ch = {{"type", "circle_move"}, {"anchor_id", cm->anchor_id}, {"angle", cm->angle}};
  } else {
    const auto& sa = std::get<SetAttribute>(p.change);
    ch = {{"type", "set_attribute"}, {"name", sa.name}, {"value", sa.value}};
  }
  return {{"player_id", p.player_id}, {"change", ch}};
}

}  // namespace playgraph
