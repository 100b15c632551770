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

// Featurizers turn a GameState into the two model inputs: a node matrix (one
// row per player) and a flat state vector. Both come out in raw units; a
// FeatureSchema fitted on the training split maps them to z-scores.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "playgraph/game_state.hpp"
#include "playgraph/tensor.hpp"

namespace playgraph {

enum class EdgeMode { constant, inverse_distance };
enum class InverseDistance { one_plus, literal };
enum class NodeFilter { all, carrier_and_defense };

inline std::string to_string(EdgeMode m) {
  return m == EdgeMode::constant ? "constant" : "inverse_distance";
}
inline std::string to_string(InverseDistance m) {
  return m == InverseDistance::one_plus ? "one_plus" : "literal";
}
inline std::string to_string(NodeFilter f) {
  return f == NodeFilter::all ? "all" : "carrier_and_defense";
}

/// Settings that change what the featurizers compute; stored with every
/// checkpoint so inference sees the training-time configuration.
struct FeaturizerConfig {
  InverseDistance inverse_distance = InverseDistance::one_plus;
  double literal_epsilon = 1e-6;
  std::optional<Position> bombsite_a;
  std::optional<Position> bombsite_b;
  std::size_t zone_count = 8;
  NodeFilter node_filter = NodeFilter::all;

  friend bool operator==(const FeaturizerConfig&, const FeaturizerConfig&) = default;
};

// ---------------------------------------------------------------------------
// FeatureSchema

struct FeatureSpec {
  std::string name;
  std::string unit;
  bool normalized = true;  // flags and one-hots stay raw
  double mean = 0.0;
  double stddev = 1.0;

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

/// Ordered feature list with raw -> normalized z-score statistics.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<FeatureSpec> specs) : specs_(std::move(specs)) {}

  std::size_t size() const { return specs_.size(); }
  const std::vector<FeatureSpec>& specs() const { return specs_; }
  std::vector<FeatureSpec>& specs() { return specs_; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& s : specs_) out.push_back(s.name);
    return out;
  }

  /// Fits mean and standard deviation of every normalized column over all
  /// rows of `samples` (each [n_i x size()]).
  void fit(std::span<const Matrix> samples) {
    const std::size_t f = specs_.size();
    std::vector<double> sum(f, 0.0), sq(f, 0.0);
    double count = 0.0;
    for (const auto& m : samples) {
      require_width(m.cols(), "fit");
      for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < f; ++j) sum[j] += m(i, j);
        count += 1.0;
      }
    }
    if (count == 0.0) throw ContractError("FeatureSchema::fit: no samples");
    for (std::size_t j = 0; j < f; ++j) sum[j] /= count;
    for (const auto& m : samples)
      for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < f; ++j) {
          const double d = m(i, j) - sum[j];
          sq[j] += d * d;
        }
    for (std::size_t j = 0; j < f; ++j) {
      if (!specs_[j].normalized) continue;
      specs_[j].mean = sum[j];
      const double sd = std::sqrt(sq[j] / count);
      specs_[j].stddev = sd > 1e-12 ? sd : 1.0;
    }
  }

  /// Raw -> normalized. Not idempotent: apply exactly once.
  Matrix apply(const Matrix& raw) const {
    require_width(raw.cols(), "apply");
    Matrix out = raw;
    for (std::size_t i = 0; i < out.rows(); ++i)
      for (std::size_t j = 0; j < specs_.size(); ++j)
        if (specs_[j].normalized) out(i, j) = (out(i, j) - specs_[j].mean) / specs_[j].stddev;
    return out;
  }
  std::vector<double> apply(std::span<const double> raw) const {
    const Matrix m = apply(Matrix::row_vector(raw));
    return m.values();
  }

  /// Empty when the names agree, otherwise a human-readable diff.
  std::string diff(const FeatureSchema& other) const {
    std::string out;
    const std::size_t n = std::max(size(), other.size());
    for (std::size_t i = 0; i < n; ++i) {
      const std::string a = i < size() ? specs_[i].name : "<none>";
      const std::string b = i < other.size() ? other.specs_[i].name : "<none>";
      if (a != b) out += "  [" + std::to_string(i) + "] " + a + " != " + b + "\n";
    }
    return out;
  }

  friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;

 private:
  void require_width(std::size_t cols, const char* what) const {
    if (cols != specs_.size())
      throw ShapeError(std::string("FeatureSchema::") + what + ": " + std::to_string(cols) +
                       " columns for a schema of " + std::to_string(specs_.size()));
  }

  std::vector<FeatureSpec> specs_;
};

struct Featurized {
  Matrix values;  // raw
  FeatureSchema schema;
};

// ---------------------------------------------------------------------------
// NFL

inline FeatureSchema nfl_node_schema() {
  return FeatureSchema({{"x", "yd"},
                        {"y", "yd"},
                        {"velocity", "yd/s"},
                        {"displacement", "yd"},
                        {"dx_to_carrier", "yd"},
                        {"dy_to_carrier", "yd"},
                        {"dspeed_to_carrier", "yd/s"},
                        {"mean_distance_to_others", "yd"},
                        {"is_offense", "flag", false},
                        {"is_carrier", "flag", false}});
}

inline FeatureSchema nfl_state_schema() {
  std::vector<FeatureSpec> specs{{"down", "count"},
                                 {"yards_to_go", "yd"},
                                 {"carrier_velocity", "yd/s"},
                                 {"carrier_displacement", "yd"}};
  for (std::size_t i = 1; i <= kNflDefenders; ++i)
    specs.push_back({"defender_distance_" + std::to_string(i), "yd"});
  return FeatureSchema(std::move(specs));
}

/// One row per player in `players` order:
/// [x, y, velocity, displacement, dx, dy, dspeed (player minus carrier),
///  mean distance to every other player, offense flag, carrier flag].
inline Featurized featurize_nfl_nodes(const GameState& s) {
  const PlayerRecord& carrier = ball_carrier(s);
  const std::size_t n = s.players.size();
  Matrix m(n, 10);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = s.players[i];
    double dist_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) dist_sum += distance(p.position, s.players[j].position);
    auto r = m.row(i);
    r[0] = p.position[0];
    r[1] = p.position[1];
    r[2] = p.velocity;
    r[3] = p.displacement;
    r[4] = p.position[0] - carrier.position[0];
    r[5] = p.position[1] - carrier.position[1];
    r[6] = p.velocity - carrier.velocity;
    r[7] = n > 1 ? dist_sum / static_cast<double>(n - 1) : 0.0;
    r[8] = p.team == Team::offense ? 1.0 : 0.0;
    r[9] = p.is_ball_carrier ? 1.0 : 0.0;
  }
  return {std::move(m), nfl_node_schema()};
}

/// [down, yards_to_go, carrier velocity, carrier displacement, the 11
/// defender-to-carrier distances sorted ascending].
inline std::vector<double> featurize_nfl_state_vector(const GameState& s) {
  const PlayerRecord& carrier = ball_carrier(s);
  std::vector<double> dists;
  for (const auto& p : s.players)
    if (p.team == Team::defense) dists.push_back(distance(p.position, carrier.position));
  if (dists.size() != kNflDefenders)
    throw DataError("state vector needs exactly 11 defenders, got " +
                        std::to_string(dists.size()),
                    DataError::npos, "team");
  std::sort(dists.begin(), dists.end());
  std::vector<double> out{s.global.at("down"), s.global.at("yards_to_go"), carrier.velocity,
                          carrier.displacement};
  out.insert(out.end(), dists.begin(), dists.end());
  return out;
}

// ---------------------------------------------------------------------------
// CSGO

inline FeatureSchema csgo_node_schema(std::size_t zone_count) {
  std::vector<FeatureSpec> specs{{"x", "units"},
                                 {"y", "units"},
                                 {"z", "units"},
                                 {"hp", "hp"},
                                 {"armor", "armor"},
                                 {"equipment_value", "$"},
                                 {"grenades", "count"},
                                 {"distance_bombsite_a", "units"},
                                 {"distance_bombsite_b", "units"},
                                 {"is_ct", "flag", false},
                                 {"is_alive", "flag", false},
                                 {"has_helmet", "flag", false},
                                 {"has_defuse_kit", "flag", false}};
  for (std::size_t z = 0; z < zone_count; ++z)
    specs.push_back({"zone_" + std::to_string(z), "one-hot", false});
  return FeatureSchema(std::move(specs));
}

inline FeatureSchema csgo_state_schema() {
  return FeatureSchema({{"time", "s"},
                        {"ct_start_equipment", "$"},
                        {"t_start_equipment", "$"},
                        {"ct_equipment", "$"},
                        {"t_equipment", "$"},
                        {"ct_hp", "hp"},
                        {"t_hp", "hp"},
                        {"ct_armor", "armor"},
                        {"t_armor", "armor"},
                        {"ct_score", "rounds"},
                        {"t_score", "rounds"},
                        {"bomb_planted", "flag", false}});
}

inline Featurized featurize_csgo_nodes(const GameState& s, const FeaturizerConfig& cfg) {
  if (!cfg.bombsite_a || !cfg.bombsite_b)
    throw ContractError("featurize_csgo_nodes: bombsite reference coordinates are not configured");
  const std::size_t n = s.players.size();
  FeatureSchema schema = csgo_node_schema(cfg.zone_count);
  Matrix m(n, schema.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = s.players[i];
    if (p.zone_id < 0 || static_cast<std::size_t>(p.zone_id) >= cfg.zone_count)
      throw DataError("zone_id " + std::to_string(p.zone_id) + " outside [0, " +
                          std::to_string(cfg.zone_count) + ")",
                      DataError::npos, "zone_id");
    auto r = m.row(i);
    r[0] = p.position[0];
    r[1] = p.position[1];
    r[2] = p.position[2];
    r[3] = p.hp;
    r[4] = p.armor;
    r[5] = p.equipment_value;
    r[6] = static_cast<double>(p.grenades);
    r[7] = distance(p.position, *cfg.bombsite_a);
    r[8] = distance(p.position, *cfg.bombsite_b);
    r[9] = p.team == Team::ct ? 1.0 : 0.0;
    r[10] = p.alive ? 1.0 : 0.0;
    r[11] = p.has_helmet ? 1.0 : 0.0;
    r[12] = p.has_defuse_kit ? 1.0 : 0.0;
    r[13 + static_cast<std::size_t>(p.zone_id)] = 1.0;
  }
  return {std::move(m), std::move(schema)};
}

/// Per-side sums over the player records plus the round-level globals.
inline std::vector<double> featurize_csgo_state_vector(const GameState& s) {
  double eq[2] = {0, 0}, hp[2] = {0, 0}, armor[2] = {0, 0};
  for (const auto& p : s.players) {
    const int side = p.team == Team::ct ? 0 : 1;
    eq[side] += p.equipment_value;
    hp[side] += p.hp;
    armor[side] += p.armor;
  }
  return {s.global.at("time"),
          s.global.at("ct_start_equipment"),
          s.global.at("t_start_equipment"),
          eq[0],
          eq[1],
          hp[0],
          hp[1],
          armor[0],
          armor[1],
          s.global.at("ct_score"),
          s.global.at("t_score"),
          s.global.at("bomb_planted")};
}

// ---------------------------------------------------------------------------
// Dispatch and graph construction

inline FeatureSchema node_schema_for(Sport sport, const FeaturizerConfig& cfg) {
  return sport == Sport::nfl ? nfl_node_schema() : csgo_node_schema(cfg.zone_count);
}
inline FeatureSchema state_schema_for(Sport sport) {
  return sport == Sport::nfl ? nfl_state_schema() : csgo_state_schema();
}

inline Featurized featurize_nodes(const GameState& s, const FeaturizerConfig& cfg) {
  return sport_of(s) == Sport::nfl ? featurize_nfl_nodes(s) : featurize_csgo_nodes(s, cfg);
}
inline std::vector<double> featurize_state_vector(const GameState& s) {
  return sport_of(s) == Sport::nfl ? featurize_nfl_state_vector(s)
                                   : featurize_csgo_state_vector(s);
}

/// G_t = (V_t, E_t) over all (or the filtered) players, self-loops included.
struct GameGraph {
  Matrix node_features;  // [N x F], raw units
  Matrix edge_weights;   // [N x N], entry (i, j) = weight of j toward i
  EdgeMode edge_mode = EdgeMode::constant;
  std::vector<std::string> node_order;
  std::vector<Team> node_teams;
};

/// Raw edge weight for two players at distance d.
inline double inverse_distance_weight(double d, const FeaturizerConfig& cfg) {
  if (cfg.inverse_distance == InverseDistance::one_plus) return 1.0 / (1.0 + d);
  return 1.0 / std::max(d, cfg.literal_epsilon);
}

inline GameGraph build_graph(const GameState& s, EdgeMode mode,
                             const FeaturizerConfig& cfg = {}) {
  if (s.players.empty()) throw DataError("graph needs at least one player", DataError::npos, "players");
  for (const auto& p : s.players)
    for (double c : p.position)
      if (!std::isfinite(c)) throw DataError("coordinate is not finite", DataError::npos, "position");

  Featurized nodes = featurize_nodes(s, cfg);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < s.players.size(); ++i) {
    const auto& p = s.players[i];
    if (cfg.node_filter == NodeFilter::all || p.is_ball_carrier || p.team == Team::defense)
      keep.push_back(i);
  }

  GameGraph g;
  g.edge_mode = mode;
  const std::size_t n = keep.size();
  g.node_features = Matrix(n, nodes.values.cols());
  g.edge_weights = Matrix(n, n, 1.0);
  for (std::size_t a = 0; a < n; ++a) {
    const auto& p = s.players[keep[a]];
    g.node_order.push_back(p.player_id);
    g.node_teams.push_back(p.team);
    std::copy(nodes.values.row(keep[a]).begin(), nodes.values.row(keep[a]).end(),
              g.node_features.row(a).begin());
    if (mode == EdgeMode::inverse_distance) {
      for (std::size_t b = 0; b < n; ++b) {
        // self-loops are exactly 1 in the default form regardless of rounding
        g.edge_weights(a, b) =
            a == b && cfg.inverse_distance == InverseDistance::one_plus
                ? 1.0
                : inverse_distance_weight(distance(p.position, s.players[keep[b]].position), cfg);
      }
    }
  }
  return g;
}

}  // namespace playgraph
