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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "test_support.hpp"

namespace playgraph {
namespace {

PlayerRecord nfl_player(std::string id, Team team, double x, double y, double v = 0.0,
                        double disp = 0.0, bool carrier = false) {
  PlayerRecord p;
  p.player_id = std::move(id);
  p.team = team;
  p.position = {x, y, 0.0};
  p.velocity = v;
  p.displacement = disp;
  p.is_ball_carrier = carrier;
  return p;
}

// carrier C at (10,20); distances C-O2 5, C-D1 4, C-D2 6, O2-D1 3, O2-D2 5, D1-D2 sqrt(52)
GameState four_player_fixture() {
  GameState s;
  s.global = {{"down", 2.0}, {"yards_to_go", 7.0}};
  s.players = {nfl_player("C", Team::offense, 10, 20, 5, 2, true),
               nfl_player("O2", Team::offense, 13, 24, 3, 1),
               nfl_player("D1", Team::defense, 10, 24, 4),
               nfl_player("D2", Team::defense, 16, 20, 6)};
  return s;
}

std::string first_field(const GameState& s) {
  const auto d = validate_state(s);
  return d.empty() ? "" : d.front().field;
}

std::string first_message(const GameState& s) {
  const auto d = validate_state(s);
  return d.empty() ? "" : d.front().message;
}

TEST(Validation, SyntheticStatesAreValid) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    EXPECT_TRUE(validate_state(testing::rush_state(seed)).empty());
    EXPECT_TRUE(validate_state(testing::round_state(seed)).empty());
  }
}

TEST(Validation, NflPlayerCount) {
  GameState s = testing::rush_state(1);
  s.players.push_back(nfl_player("extra", Team::offense, 1, 1));
  EXPECT_EQ(first_field(s), "players");
  EXPECT_EQ(first_message(s), "NFL states need exactly 22 players, got 23");
  try {
    require_valid(s, {}, 4);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "players");
    EXPECT_EQ(e.record(), 4u);
  }
}

TEST(Validation, NflCarrierRules) {
  GameState s = testing::rush_state(2);
  for (auto& p : s.players) p.is_ball_carrier = false;
  EXPECT_EQ(first_field(s), "is_ball_carrier");
  s = testing::rush_state(2);
  for (auto& p : s.players)
    if (p.team == Team::defense) {
      p.is_ball_carrier = true;
      break;
    }
  EXPECT_EQ(first_field(s), "is_ball_carrier");
  EXPECT_EQ(first_message(s), "ball-carrier must be on offense");
}

TEST(Validation, NflDefenderCount) {
  GameState s = testing::rush_state(3);
  for (auto& p : s.players)
    if (p.team == Team::defense) {
      p.team = Team::offense;
      break;
    }
  EXPECT_EQ(first_message(s), "NFL states need exactly 11 defenders, got 10");
}

TEST(Validation, PlayerRules) {
  GameState s = testing::rush_state(4);
  s.players[1].player_id = s.players[0].player_id;
  EXPECT_EQ(first_field(s), "players[1].player_id");

  s = testing::rush_state(4);
  s.players[2].position[1] = std::nan("");
  EXPECT_EQ(first_field(s), "players[2].position");

  GameState r = testing::round_state(4);
  r.players[3].alive = false;
  r.players[3].hp = 40;
  EXPECT_EQ(first_field(r), "players[3].hp");
  EXPECT_EQ(first_message(r), "dead player must have hp == 0");

  r = testing::round_state(4);
  r.players[0].grenades = -1;
  EXPECT_EQ(first_field(r), "players[0].grenades");
}

TEST(Validation, StateRules) {
  EXPECT_EQ(first_field(GameState{}), "players");

  GameState mixed = testing::rush_state(5);
  mixed.players[0].team = Team::ct;
  EXPECT_EQ(first_message(mixed), "state mixes offense/defense with T/CT teams");

  GameState r = testing::round_state(5);
  r.outcome = 0.5;
  EXPECT_EQ(first_field(r), "outcome");
  r.outcome.reset();
  EXPECT_TRUE(validate_state(r).empty());
  EXPECT_EQ(validate_state(r, {true}).front().field, "outcome");

  r = testing::round_state(5);
  r.players.pop_back();
  EXPECT_EQ(first_message(r), "CSGO states need exactly 10 players, got 9");
}

TEST(NflNodes, FourPlayerHandOracle) {
  const Featurized f = featurize_nfl_nodes(four_player_fixture());
  const double s52 = std::sqrt(52.0);
  const Matrix expected{{10, 20, 5, 2, 0, 0, 0, 5, 1, 1},
                        {13, 24, 3, 1, 3, 4, -2, 13.0 / 3.0, 1, 0},
                        {10, 24, 4, 0, 0, 4, -1, (7.0 + s52) / 3.0, 0, 0},
                        {16, 20, 6, 0, 6, 0, 1, (11.0 + s52) / 3.0, 0, 0}};
  ASSERT_EQ(f.values.cols(), f.schema.size());
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 10; ++j)
      EXPECT_NEAR(f.values(i, j), expected(i, j), 1e-12) << "row " << i << " col " << j;
}

TEST(BuildGraph, InverseDistanceHandOracle) {
  const GameGraph g = build_graph(four_player_fixture(), EdgeMode::inverse_distance);
  const double d12 = 1.0 / (1.0 + std::sqrt(52.0));
  const Matrix expected{{1, 1.0 / 6, 1.0 / 5, 1.0 / 7},
                        {1.0 / 6, 1, 1.0 / 4, 1.0 / 6},
                        {1.0 / 5, 1.0 / 4, 1, d12},
                        {1.0 / 7, 1.0 / 6, d12, 1}};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(g.edge_weights(i, j), expected(i, j), 1e-15);
  EXPECT_EQ(g.node_order, (std::vector<std::string>{"C", "O2", "D1", "D2"}));
}

TEST(BuildGraph, FullNflGraph) {
  const GameState s = testing::rush_state(6);
  const GameGraph c = build_graph(s, EdgeMode::constant);
  EXPECT_EQ(c.edge_weights.size(), 484u);
  for (double v : c.edge_weights.values()) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(c.node_features.rows(), 22u);
  const GameGraph d = build_graph(s, EdgeMode::inverse_distance);
  for (std::size_t i = 0; i < 22; ++i) {
    EXPECT_EQ(d.edge_weights(i, i), 1.0);
    for (std::size_t j = 0; j < 22; ++j) EXPECT_EQ(d.edge_weights(i, j), d.edge_weights(j, i));
  }
}

TEST(BuildGraph, UnitDistanceWeightsHalf) {
  GameState s;
  s.players = {nfl_player("a", Team::offense, 0, 0, 0, 0, true), nfl_player("b", Team::defense, 1, 0)};
  EXPECT_EQ(build_graph(s, EdgeMode::inverse_distance).edge_weights(0, 1), 0.5);
  FeaturizerConfig literal;
  literal.inverse_distance = InverseDistance::literal;
  s.players[1].position = {0, 4, 0};
  const GameGraph g = build_graph(s, EdgeMode::inverse_distance, literal);
  EXPECT_EQ(g.edge_weights(0, 1), 0.25);
  EXPECT_EQ(g.edge_weights(0, 0), 1e6);
}

TEST(BuildGraph, CarrierAndDefenseFilter) {
  FeaturizerConfig cfg;
  cfg.node_filter = NodeFilter::carrier_and_defense;
  const GameGraph g = build_graph(four_player_fixture(), EdgeMode::inverse_distance, cfg);
  EXPECT_EQ(g.node_order, (std::vector<std::string>{"C", "D1", "D2"}));
  EXPECT_DOUBLE_EQ(g.edge_weights(0, 1), 1.0 / 5);
  EXPECT_DOUBLE_EQ(g.node_features(2, 0), 16.0);
}

TEST(BuildGraph, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(build_graph(GameState{}, EdgeMode::constant), DataError);
  GameState s = four_player_fixture();
  s.players[0].position[0] = INFINITY;
  EXPECT_THROW(build_graph(s, EdgeMode::constant), DataError);
}

TEST(NflStateVector, SortedDefenderDistances) {
  GameState s = four_player_fixture();
  // nine more defenders on a line 10..90 yards ahead of the carrier
  for (int k = 1; k <= 9; ++k)
    s.players.push_back(nfl_player("X" + std::to_string(k), Team::defense, 10.0 + 10.0 * (10 - k), 20));
  const auto v = featurize_nfl_state_vector(s);
  ASSERT_EQ(v.size(), nfl_state_schema().size());
  const std::vector<double> expected{2, 7, 5, 2, 4, 6, 10, 20, 30, 40, 50, 60, 70, 80, 90};
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(v[i], expected[i], 1e-12) << i;
}

TEST(NflStateVector, TiesAndOrderIndependence) {
  GameState s = testing::rush_state(7);
  const PlayerRecord carrier = ball_carrier(s);
  int k = 0;
  for (auto& p : s.players)
    if (p.team == Team::defense && k++ < 3) p.position = {carrier.position[0] + 3, carrier.position[1] + 4, 0};
  const auto v = featurize_nfl_state_vector(s);
  EXPECT_TRUE(std::is_sorted(v.begin() + 4, v.end()));
  EXPECT_EQ(std::count(v.begin() + 4, v.end(), 5.0), 3);
  GameState r = s;
  std::reverse(r.players.begin(), r.players.end());
  EXPECT_EQ(featurize_nfl_state_vector(r), v);
}

TEST(NflStateVector, RotationAboutCarrierIsInvariant) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GameState s = testing::rush_state(seed);
    const auto before = featurize_nfl_state_vector(s);
    const Position c = ball_carrier(s).position;
    const double a = 0.1 + 0.3 * static_cast<double>(seed);
    for (auto& p : s.players) {
      const double dx = p.position[0] - c[0], dy = p.position[1] - c[1];
      p.position[0] = c[0] + std::cos(a) * dx - std::sin(a) * dy;
      p.position[1] = c[1] + std::sin(a) * dx + std::cos(a) * dy;
    }
    const auto after = featurize_nfl_state_vector(s);
    for (std::size_t i = 0; i < before.size(); ++i) EXPECT_NEAR(after[i], before[i], 1e-9);
  }
}

TEST(NflStateVector, NeedsElevenDefenders) {
  EXPECT_THROW(featurize_nfl_state_vector(four_player_fixture()), DataError);
}

GameState csgo_fixture() {
  GameState s;
  s.global = {{"time", 30.0},       {"ct_start_equipment", 4000.0}, {"t_start_equipment", 3500.0},
              {"ct_score", 3.0},    {"t_score", 5.0},               {"bomb_planted", 1.0}};
  for (int i = 0; i < 10; ++i) {
    PlayerRecord p;
    p.player_id = (i < 5 ? "ct" : "t") + std::to_string(i % 5);
    p.team = i < 5 ? Team::ct : Team::t;
    p.dims = 3;
    p.position = {100.0 * i, 0.0, 0.0};
    p.hp = i == 9 ? 0.0 : 100.0;
    p.alive = i != 9;
    p.armor = 50.0;
    p.equipment_value = 1000.0 + i;
    p.grenades = i % 3;
    p.has_helmet = i % 2 == 0;
    p.has_defuse_kit = i == 1;
    p.zone_id = i % 8;
    s.players.push_back(p);
  }
  return s;
}

TEST(CsgoNodes, HandOracle) {
  FeaturizerConfig cfg;
  cfg.bombsite_a = Position{0.0, 300.0, 0.0};
  cfg.bombsite_b = Position{100.0, 0.0, 400.0};
  const GameState s = csgo_fixture();
  ASSERT_TRUE(validate_state(s).empty());
  const Featurized f = featurize_csgo_nodes(s, cfg);
  ASSERT_EQ(f.values.rows(), 10u);
  ASSERT_EQ(f.values.cols(), 13u + 8u);
  // player 1: (100,0,0), CT, helmet off, defuse kit, zone 1
  const std::vector<double> row1{100, 0, 0, 100, 50, 1001, 1, std::sqrt(100.0 * 100 + 300.0 * 300), 400,
                                 1, 1, 0, 1, 0, 1, 0, 0, 0, 0, 0, 0};
  for (std::size_t j = 0; j < row1.size(); ++j) EXPECT_DOUBLE_EQ(f.values(1, j), row1[j]) << j;
  // player 9: dead T in zone 1
  EXPECT_EQ(f.values(9, 3), 0.0);
  EXPECT_EQ(f.values(9, 9), 0.0);
  EXPECT_EQ(f.values(9, 10), 0.0);
  EXPECT_EQ(f.values(9, 13 + 1), 1.0);
  EXPECT_DOUBLE_EQ(f.values(9, 7), std::sqrt(900.0 * 900 + 300.0 * 300));

  FeaturizerConfig missing;
  EXPECT_THROW(featurize_csgo_nodes(s, missing), ContractError);
  GameState bad = s;
  bad.players[0].zone_id = 8;
  EXPECT_THROW(featurize_csgo_nodes(bad, cfg), DataError);
}

TEST(CsgoStateVector, SideSums) {
  const auto v = featurize_csgo_state_vector(csgo_fixture());
  const std::vector<double> expected{30, 4000, 3500, 5010, 5035, 500, 400, 250, 250, 3, 5, 1};
  EXPECT_EQ(v, expected);
  ASSERT_EQ(v.size(), csgo_state_schema().size());
  GameState s = csgo_fixture();
  s.global = {{"time", 1.0}};
  EXPECT_THROW(featurize_csgo_state_vector(s), DataError);
}

TEST(FeatureSchema, FitAndApply) {
  FeatureSchema schema({{"a", "u"}, {"flag", "flag", false}});
  const std::vector<Matrix> samples{Matrix{{1.0, 1.0}, {3.0, 0.0}}, Matrix{{5.0, 1.0}}};
  schema.fit(samples);
  EXPECT_DOUBLE_EQ(schema.specs()[0].mean, 3.0);
  EXPECT_DOUBLE_EQ(schema.specs()[0].stddev, std::sqrt(8.0 / 3.0));
  EXPECT_EQ(schema.specs()[1].mean, 0.0);
  const Matrix z = schema.apply(Matrix{{3.0, 1.0}});
  EXPECT_EQ(z, (Matrix{{0.0, 1.0}}));
  EXPECT_THROW(schema.apply(Matrix(1, 3)), ShapeError);
}

TEST(FeatureSchema, ConstantColumnKeepsUnitScale) {
  FeatureSchema schema(std::vector<FeatureSpec>{{"c", "u"}});
  const std::vector<Matrix> samples{Matrix{{2.0}, {2.0}}};
  schema.fit(samples);
  EXPECT_EQ(schema.specs()[0].stddev, 1.0);
  EXPECT_EQ(schema.apply(Matrix{{2.0}}), Matrix(1, 1, 0.0));
}

TEST(FeatureSchema, DiffNamesMismatches) {
  const FeatureSchema a({{"x", "u"}, {"y", "u"}});
  const FeatureSchema b({{"x", "u"}, {"z", "u"}, {"w", "u"}});
  EXPECT_EQ(a.diff(a), "");
  EXPECT_EQ(a.diff(b), "  [1] y != z\n  [2] <none> != w\n");
}

}  // namespace
}  // namespace playgraph
