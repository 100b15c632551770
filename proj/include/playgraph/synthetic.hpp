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

// Seeded stand-ins for the rushing-yards and round-winner tasks. Each label
// comes from a closed-form oracle, so what a model should learn is known.
//
// Rush: yards = clamp(alpha * d + beta * v - gamma * n_close, 0, cap) where d
// is the distance from the carrier to the nearest defender inside the forward
// cone (+x, +-45 degrees), capped at cap_distance. interaction_strength s blends
// in the direction-blind nearest-defender distance: d = s * d_cone + (1 - s) * d_any.
//
// Round: P(CT wins) = sigmoid(w1 * dAlive + w2 * dHp / 100 + w3 * dEquip / 1000
//                             + s * w4 * site_control), label ~ Bernoulli(p).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "playgraph/features.hpp"
#include "playgraph/game_state.hpp"
#include "playgraph/random.hpp"
#include "playgraph/tensor.hpp"

namespace playgraph {

enum class SyntheticTask { rush, round };

inline std::string to_string(SyntheticTask t) { return t == SyntheticTask::rush ? "rush" : "round"; }

struct RushOracleConfig {
  double alpha = 0.8;
  double beta = 0.5;
  double gamma = 1.0;
  double cap = 25.0;
  /// d_front when the cone is empty, and the ceiling on any cone distance.
  double cap_distance = 40.0;
  double close_radius = 3.0;
  double cone_half_angle = std::numbers::pi / 4.0;
};

struct RoundOracleConfig {
  double w_alive = 0.9;
  double w_hp = 0.4;
  double w_equipment = 0.3;
  double w_site = 0.5;
  /// Length scale of the exp(-d / scale) bombsite proximity.
  double site_scale = 500.0;
};

inline constexpr double kFieldLength = 120.0;
inline constexpr double kFieldWidth = 53.3;
inline constexpr double kMapSize = 2000.0;

/// Bombsite coordinates of the synthetic round map.
inline FeaturizerConfig synthetic_round_featurizer() {
  FeaturizerConfig cfg;
  cfg.bombsite_a = Position{1600.0, 1600.0, 0.0};
  cfg.bombsite_b = Position{400.0, 1600.0, 0.0};
  cfg.zone_count = 8;
  return cfg;
}

struct SyntheticConfig {
  std::uint64_t seed = 0;
  std::size_t n_states = 1000;
  double noise_std = 1.0;
  SyntheticTask task = SyntheticTask::rush;
  double interaction_strength = 1.0;
  RushOracleConfig rush;
  RoundOracleConfig round;
};

// ---------------------------------------------------------------------------
// Oracles

inline double rush_oracle_yards(const GameState& s, const RushOracleConfig& c = {},
                                double interaction_strength = 1.0) {
  const PlayerRecord& carrier = ball_carrier(s);
  double d_cone = c.cap_distance;
  double d_any = c.cap_distance;
  int n_close = 0;
  for (const auto& p : s.players) {
    if (p.team != Team::defense) continue;
    const double dx = p.position[0] - carrier.position[0];
    const double dy = p.position[1] - carrier.position[1];
    const double d = std::sqrt(dx * dx + dy * dy);
    d_any = std::min(d_any, d);
    // angle test rather than |dy| <= dx tan(a): tan(pi/4) rounds below 1
    if (dx >= 0.0 && std::atan2(std::abs(dy), dx) <= c.cone_half_angle) d_cone = std::min(d_cone, d);
    if (d <= c.close_radius) ++n_close;
  }
  const double d = interaction_strength * d_cone + (1.0 - interaction_strength) * d_any;
  const double yards = c.alpha * d + c.beta * carrier.velocity - c.gamma * n_close;
  return std::clamp(yards, 0.0, c.cap);
}

/// sum over alive CT of exp(-d_site / scale) minus the same over alive T, with
/// d_site the distance to the nearer bombsite.
inline double site_control(const GameState& s, const FeaturizerConfig& map,
                           const RoundOracleConfig& c = {}) {
  double total = 0.0;
  for (const auto& p : s.players) {
    if (!p.alive) continue;
    const double d = std::min(distance(p.position, *map.bombsite_a),
                              distance(p.position, *map.bombsite_b));
    const double prox = std::exp(-d / c.site_scale);
    total += p.team == Team::ct ? prox : -prox;
  }
  return total;
}

inline double round_oracle_prob(const GameState& s, const RoundOracleConfig& c = {},
                                double interaction_strength = 1.0,
                                const FeaturizerConfig& map = synthetic_round_featurizer()) {
  double alive = 0.0, hp = 0.0, eq = 0.0;
  for (const auto& p : s.players) {
    const double sign = p.team == Team::ct ? 1.0 : -1.0;
    alive += p.alive ? sign : 0.0;
    hp += sign * p.hp;
    eq += sign * p.equipment_value;
  }
  const double logit = c.w_alive * alive + c.w_hp * hp / 100.0 + c.w_equipment * eq / 1000.0 +
                       interaction_strength * c.w_site * site_control(s, map, c);
  return sigmoid(logit);
}

// ---------------------------------------------------------------------------
// Generators

namespace detail {

inline double clamp_field(double v, double hi) { return std::clamp(v, 0.0, hi); }

inline GameState random_rush_state(Rng& rng, std::size_t index) {
  GameState s;
  s.t = rng.uniform(0.0, 4.0);
  s.global.set("down", static_cast<double>(1 + rng.index(4)));
  s.global.set("yards_to_go", std::round(rng.uniform(1.0, 15.0)));
  s.partition_key = "nfl";
  s.group = "play-" + std::to_string(index);

  PlayerRecord carrier;
  carrier.player_id = "c";
  carrier.team = Team::offense;
  carrier.is_ball_carrier = true;
  carrier.position = {rng.uniform(15.0, 95.0), rng.uniform(8.0, kFieldWidth - 8.0), 0.0};
  carrier.velocity = rng.uniform(0.0, 7.0);
  carrier.displacement = rng.uniform(0.0, 0.8);
  s.players.push_back(carrier);

  for (int i = 1; i <= 10; ++i) {
    PlayerRecord p;
    p.player_id = "o" + std::to_string(i);
    p.team = Team::offense;
    p.position = {clamp_field(carrier.position[0] + rng.normal(-1.0, 4.0), kFieldLength),
                  clamp_field(carrier.position[1] + rng.normal(0.0, 7.0), kFieldWidth), 0.0};
    p.velocity = rng.uniform(0.0, 6.0);
    p.displacement = rng.uniform(0.0, 0.7);
    s.players.push_back(p);
  }
  for (int i = 1; i <= 11; ++i) {
    PlayerRecord p;
    p.player_id = "d" + std::to_string(i);
    p.team = Team::defense;
    p.position = {clamp_field(carrier.position[0] + rng.uniform(-6.0, 14.0), kFieldLength),
                  clamp_field(carrier.position[1] + rng.uniform(-14.0, 14.0), kFieldWidth), 0.0};
    p.velocity = rng.uniform(0.0, 6.0);
    p.displacement = rng.uniform(0.0, 0.7);
    s.players.push_back(p);
  }
  rng.shuffle(s.players);
  return s;
}

inline int zone_of(const Position& p) {
  const int col = std::clamp(static_cast<int>(p[0] / (kMapSize / 4.0)), 0, 3);
  const int row = std::clamp(static_cast<int>(p[1] / (kMapSize / 2.0)), 0, 1);
  return col + 4 * row;
}

inline GameState random_round_state(Rng& rng, std::size_t index) {
  GameState s;
  s.t = rng.uniform(0.0, 115.0);
  s.global.set("time", s.t);
  s.global.set("ct_start_equipment", std::round(rng.uniform(4000.0, 25000.0)));
  s.global.set("t_start_equipment", std::round(rng.uniform(4000.0, 25000.0)));
  s.global.set("ct_score", static_cast<double>(rng.index(16)));
  s.global.set("t_score", static_cast<double>(rng.index(16)));
  s.global.set("bomb_planted", rng.bernoulli(0.2) ? 1.0 : 0.0);
  s.partition_key = "synthetic";
  s.group = "round-" + std::to_string(index);
  for (int side = 0; side < 2; ++side) {
    for (int i = 1; i <= 5; ++i) {
      PlayerRecord p;
      p.team = side == 0 ? Team::ct : Team::t;
      p.player_id = (side == 0 ? "ct" : "t") + std::to_string(i);
      p.dims = 3;
      p.position = {rng.uniform(0.0, kMapSize), rng.uniform(0.0, kMapSize), rng.uniform(0.0, 100.0)};
      p.zone_id = zone_of(p.position);
      p.alive = rng.bernoulli(0.75);
      if (p.alive) {
        p.hp = std::round(rng.uniform(1.0, 100.0));
        p.armor = std::round(rng.uniform(0.0, 100.0));
        p.equipment_value = std::round(rng.uniform(200.0, 5000.0));
        p.grenades = static_cast<int>(rng.index(5));
        p.has_helmet = rng.bernoulli(0.6);
        p.has_defuse_kit = p.team == Team::ct && rng.bernoulli(0.5);
      }
      s.players.push_back(p);
    }
  }
  rng.shuffle(s.players);
  return s;
}

}  // namespace detail

inline std::vector<GameState> gen_rush_states(const SyntheticConfig& cfg) {
  if (cfg.task != SyntheticTask::rush) throw ContractError("gen_rush_states: task must be rush");
  Rng rng(cfg.seed);
  std::vector<GameState> out;
  out.reserve(cfg.n_states);
  for (std::size_t i = 0; i < cfg.n_states; ++i) {
    GameState s = detail::random_rush_state(rng, i);
    const double y = rush_oracle_yards(s, cfg.rush, cfg.interaction_strength);
    const double noise = rng.normal();
    s.outcome = cfg.noise_std > 0.0 ? y + cfg.noise_std * noise : y;
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<GameState> gen_round_states(const SyntheticConfig& cfg) {
  if (cfg.task != SyntheticTask::round) throw ContractError("gen_round_states: task must be round");
  Rng rng(cfg.seed);
  std::vector<GameState> out;
  out.reserve(cfg.n_states);
  for (std::size_t i = 0; i < cfg.n_states; ++i) {
    GameState s = detail::random_round_state(rng, i);
    const double p = round_oracle_prob(s, cfg.round, cfg.interaction_strength);
    s.outcome = rng.bernoulli(p) ? 1.0 : 0.0;
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<GameState> gen_states(const SyntheticConfig& cfg) {
  return cfg.task == SyntheticTask::rush ? gen_rush_states(cfg) : gen_round_states(cfg);
}

}  // namespace playgraph
