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

#include <sstream>

#include "test_support.hpp"

namespace playgraph {
namespace {

std::string jsonl(const std::vector<GameState>& states) {
  std::ostringstream out;
  write_states(out, states);
  return out.str();
}

std::vector<GameState> parse(const std::string& text, const ParseOptions& opt = {}) {
  std::istringstream in(text);
  return read_states(in, opt);
}

TEST(StateIo, EmptyInput) {
  EXPECT_TRUE(parse("").empty());
  EXPECT_TRUE(parse("\n  \n\t\n").empty());
}

TEST(StateIo, RoundTripIsExact) {
  const std::vector<GameState> states{testing::rush_state(1), testing::round_state(2),
                                      testing::rush_state(3)};
  const std::string text = jsonl(states);
  const auto back = parse(text);
  EXPECT_EQ(back, states);
  EXPECT_EQ(jsonl(back), text);
  EXPECT_EQ(back[1].players[0].dims, 3);
  EXPECT_EQ(back[0].players[0].dims, 2);
}

TEST(StateIo, BlankLinesAreSkipped) {
  const auto text = "\n" + jsonl({testing::rush_state(1)}) + "\n\n" + jsonl({testing::rush_state(2)});
  EXPECT_EQ(parse(text).size(), 2u);
}

TEST(StateIo, MalformedLineIsNamed) {
  const auto text = jsonl({testing::rush_state(1)}) + "{\"t\": \n";
  try {
    parse(text);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2: malformed JSON"), std::string::npos) << e.what();
    EXPECT_EQ(e.record(), 1u);
  }
}

TEST(StateIo, BadFieldIsNamed) {
  Json j = to_json(testing::rush_state(1));
  j["players"][3]["team"] = "goalie";
  try {
    parse(jsonl({testing::rush_state(2)}) + j.dump() + "\n");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.field(), "players[3].team");
    EXPECT_EQ(e.record(), 1u);
    EXPECT_EQ(std::string(e.what()),
              "line 2: record 1: field 'players[3].team': team must be offense, defense, T or CT");
  }
  j = to_json(testing::rush_state(1));
  j["players"][0]["velocity"] = "fast";
  try {
    parse(j.dump());
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.field(), "players[0].velocity");
  }
  j = to_json(testing::rush_state(1));
  j["players"][0]["position"] = Json::array({1.0});
  EXPECT_THROW(parse(j.dump()), DataError);
}

TEST(StateIo, RuleViolationStaysAValidationError) {
  Json j = to_json(testing::rush_state(1));
  j["players"].erase(0);
  try {
    parse(j.dump());
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "players");
    EXPECT_EQ(std::string(e.what()).rfind("line 1: ", 0), 0u) << e.what();
  }
}

TEST(StateIo, UnknownKeysWarnOrFail) {
  Json j = to_json(testing::rush_state(1));
  j["weather"] = "rain";
  j["players"][0]["jersey"] = 12;
  std::vector<std::string> warnings;
  ParseOptions lenient;
  lenient.warn = [&](const std::string& w) { warnings.push_back(w); };
  EXPECT_EQ(parse(j.dump(), lenient).size(), 1u);
  ASSERT_EQ(warnings.size(), 2u);
  EXPECT_EQ(warnings[0], "record 0: ignoring unknown key 'weather'");
  EXPECT_EQ(warnings[1], "record 0: ignoring unknown key 'players[0].jersey'");

  ParseOptions strict;
  strict.strict = true;
  try {
    parse(j.dump(), strict);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.field(), "weather");
  }
}

TEST(StateIo, BooleansAndOptionalFields) {
  Json j = to_json(testing::round_state(3));
  j["outcome"] = true;
  j["global"]["bomb_planted"] = false;
  j.erase("partition_key");
  const GameState s = parse(j.dump()).front();
  EXPECT_EQ(*s.outcome, 1.0);
  EXPECT_EQ(s.global.at("bomb_planted"), 0.0);
  EXPECT_EQ(s.partition_key, "");
  j["outcome"] = nullptr;
  EXPECT_FALSE(parse(j.dump()).front().outcome.has_value());
  j["outcome"] = "win";
  EXPECT_THROW(parse(j.dump()), DataError);
}

TEST(StateIo, RequireOutcome) {
  Json j = to_json(testing::rush_state(4));
  j["outcome"] = nullptr;
  ParseOptions opt;
  opt.validation.require_outcome = true;
  EXPECT_THROW(parse(j.dump(), opt), ValidationError);
}

TEST(StateIo, MissingFileIsADataError) {
  EXPECT_THROW(load_states("/nonexistent/states.jsonl"), DataError);
}

}  // namespace
}  // namespace playgraph
