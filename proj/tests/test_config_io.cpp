// Copyright 2026 The nashvi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "nashvi/config_io.hpp"
#include "oracles.hpp"

using namespace nashvi;
using nlohmann::json;

namespace {

json minimal() {
  return json::parse(R"({
    "n_agents": 1, "n_states": 2, "n_actions": [2], "gamma": 0.5, "rho": [1, 0], "reward_bound": 1,
    "transitions": [
      {"state": 0, "actions": [0], "probs": [0.5, 0.5]},
      {"state": 0, "actions": [1], "probs": [1, 0]},
      {"state": 1, "actions": [0], "probs": [0, 1]},
      {"state": 1, "actions": [1], "probs": [0.25, 0.75]}],
    "rewards": [{"agent": 0, "state": 1, "actions": [1], "value": -1}]
  })");
}

std::string error_of(const json& doc) {
  try {
    parse_game(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(ParseGame, Minimal) {
  const GameDocument doc = parse_game(minimal());
  EXPECT_EQ(doc.game.n_states(), 2);
  EXPECT_EQ(doc.game.transition(1, 1, 1), 0.75);
  EXPECT_EQ(doc.game.reward(0, 1, 1), -1.0);
  EXPECT_EQ(doc.game.reward(0, 0, 0), 0.0);
  EXPECT_EQ(doc.parameterization.kind, ParamKind::kDirect);
}

TEST(ParseGame, RenormalizesTinyDrift) {
  json doc = minimal();
  doc["transitions"][0]["probs"] = {0.5, 0.5 + 1e-13};
  const GameDocument g = parse_game(doc);
  EXPECT_NEAR(g.game.transition(0, 0, 0) + g.game.transition(0, 0, 1), 1.0, 1e-16);
}

TEST(ParseGame, Errors) {
  json doc = minimal();
  doc.erase("gamma");
  EXPECT_NE(error_of(doc).find("missing field 'gamma'"), std::string::npos);

  doc = minimal();
  doc["transitions"][0]["probs"] = {0.6, 0.3};
  EXPECT_NE(error_of(doc).find("sum to"), std::string::npos);

  doc = minimal();
  doc["transitions"].erase(3);
  EXPECT_NE(error_of(doc).find("no transition row"), std::string::npos);

  doc = minimal();
  doc["transitions"].push_back(doc["transitions"][0]);
  EXPECT_NE(error_of(doc).find("duplicate"), std::string::npos);

  doc = minimal();
  doc["gamma"] = 1.0;
  EXPECT_NE(error_of(doc).find("discount out of range"), std::string::npos);

  doc = minimal();
  doc["rewards"][0]["value"] = 3.0;
  EXPECT_NE(error_of(doc).find("exceeds reward_bound"), std::string::npos);

  doc = minimal();
  doc["transitions"][0]["actions"] = {2};
  EXPECT_NE(error_of(doc).find("out of range"), std::string::npos);

  doc = minimal();
  doc["policy"] = {{"kind", "two_action_box"}, {"alpha", 1.5}};
  EXPECT_NE(error_of(doc).find("alpha"), std::string::npos);

  doc = minimal();
  doc["policy"] = {{"kind", "softmax"}};
  EXPECT_NE(error_of(doc).find("unknown parameterization"), std::string::npos);

  doc = minimal();
  doc["n_actions"] = "two";
  EXPECT_NE(error_of(doc).find("wrong type"), std::string::npos);
}

TEST(LoadGame, BundledFiles) {
  for (const char* name : {"two_player.cfg", "zero_reward.cfg", "coordination.cfg"}) {
    const GameDocument doc = load_game(oracle::config(name));
    EXPECT_TRUE(validate_game(doc.game).ok()) << name;
  }
}

TEST(LoadGame, MissingFile) {
  EXPECT_THROW(load_game("/nonexistent/game.cfg"), ConfigError);
}

TEST(LoadGame, CommentsAndSyntaxErrors) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto good = dir / "nashvi_comment_test.cfg";
  std::ofstream(good) << "// leading comment\n" << minimal().dump(2) << "\n/* trailing */\n";
  EXPECT_NO_THROW(load_game(good));
  const auto bad = dir / "nashvi_syntax_test.cfg";
  std::ofstream(bad) << "{\"n_agents\": 1,";
  EXPECT_THROW(load_game(bad), ConfigError);
  std::filesystem::remove(good);
  std::filesystem::remove(bad);
}

TEST(GameToJson, RoundTrip) {
  const GameDocument doc = oracle::bundled("coordination.cfg");
  const GameDocument again = parse_game(game_to_json(doc.game, doc.parameterization));
  EXPECT_EQ(std::vector<double>(again.game.raw_transitions().begin(), again.game.raw_transitions().end()),
            std::vector<double>(doc.game.raw_transitions().begin(), doc.game.raw_transitions().end()));
  EXPECT_EQ(std::vector<double>(again.game.raw_rewards().begin(), again.game.raw_rewards().end()),
            std::vector<double>(doc.game.raw_rewards().begin(), doc.game.raw_rewards().end()));
  EXPECT_EQ(again.parameterization.kind, doc.parameterization.kind);
  EXPECT_EQ(again.parameterization.alpha, doc.parameterization.alpha);
}
