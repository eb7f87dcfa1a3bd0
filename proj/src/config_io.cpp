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

#include "nashvi/config_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace nashvi {

using nlohmann::json;

namespace {

template <class T>
T required(const json& doc, const char* key) {
  if (!doc.contains(key)) throw ConfigError(std::string("game config: missing field '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("game config: field '") + key + "' has the wrong type: " + e.what());
  }
}

void renormalize(std::vector<double>& row, const std::string& what) {
  double sum = 0.0;
  for (double p : row) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError(what + ": negative or non-finite probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kStochasticTolerance) {
    std::ostringstream msg;
    msg << what << ": probabilities sum to " << sum << ", not 1";
    throw ConfigError(msg.str());
  }
  for (double& p : row) p /= sum;
}

}  // namespace

GameDocument parse_game(const json& doc) {
  const int n_agents = required<int>(doc, "n_agents");
  const int n_states = required<int>(doc, "n_states");
  const auto n_actions = required<std::vector<int>>(doc, "n_actions");
  const double gamma = required<double>(doc, "gamma");
  auto rho = required<std::vector<double>>(doc, "rho");
  const double reward_bound = required<double>(doc, "reward_bound");

  if (n_agents <= 0 || static_cast<int>(n_actions.size()) != n_agents)
    throw ConfigError("game config: n_actions must list one count per agent");
  if (n_states <= 0) throw ConfigError("game config: n_states must be positive");
  for (int count : n_actions)
    if (count <= 0) throw ConfigError("game config: action counts must be positive");
  if (static_cast<int>(rho.size()) != n_states) throw ConfigError("game config: rho has wrong length");
  renormalize(rho, "game config: rho");

  int n_joint = 1;
  for (int count : n_actions) n_joint *= count;
  const auto joint_of = [&](const std::vector<int>& actions, const std::string& where) {
    if (static_cast<int>(actions.size()) != n_agents)
      throw ConfigError(where + ": actions must list one entry per agent");
    int joint = 0;
    int stride = 1;
    for (int i = 0; i < n_agents; ++i) {
      if (actions[static_cast<std::size_t>(i)] < 0 || actions[static_cast<std::size_t>(i)] >= n_actions[static_cast<std::size_t>(i)])
        throw ConfigError(where + ": action index out of range");
      joint += actions[static_cast<std::size_t>(i)] * stride;
      stride *= n_actions[static_cast<std::size_t>(i)];
    }
    return joint;
  };
  const auto state_of = [&](const json& entry, const std::string& where) {
    const int s = required<int>(entry, "state");
    if (s < 0 || s >= n_states) throw ConfigError(where + ": state index out of range");
    return s;
  };

  const auto rows = static_cast<std::size_t>(n_states) * n_joint;
  std::vector<double> transition(rows * n_states, 0.0);
  std::vector<bool> seen(rows, false);
  const json transitions = required<json>(doc, "transitions");
  if (!transitions.is_array()) throw ConfigError("game config: transitions must be a list");
  for (std::size_t k = 0; k < transitions.size(); ++k) {
    const std::string where = "game config: transitions[" + std::to_string(k) + "]";
    const json& entry = transitions[k];
    const int s = state_of(entry, where);
    const int joint = joint_of(required<std::vector<int>>(entry, "actions"), where);
    auto probs = required<std::vector<double>>(entry, "probs");
    if (static_cast<int>(probs.size()) != n_states) throw ConfigError(where + ": probs has wrong length");
    renormalize(probs, where);
    const std::size_t row = static_cast<std::size_t>(s) * n_joint + joint;
    if (seen[row]) throw ConfigError(where + ": duplicate (state, actions) entry");
    seen[row] = true;
    std::copy(probs.begin(), probs.end(), transition.begin() + static_cast<std::ptrdiff_t>(row * n_states));
  }
  for (std::size_t row = 0; row < rows; ++row)
    if (!seen[row]) {
      std::ostringstream msg;
      msg << "game config: no transition row for state " << row / n_joint << ", joint action "
          << row % n_joint;
      throw ConfigError(msg.str());
    }

  std::vector<double> reward(static_cast<std::size_t>(n_agents) * rows, 0.0);
  if (doc.contains("rewards")) {
    const json& rewards = doc.at("rewards");
    if (!rewards.is_array()) throw ConfigError("game config: rewards must be a list");
    for (std::size_t k = 0; k < rewards.size(); ++k) {
      const std::string where = "game config: rewards[" + std::to_string(k) + "]";
      const json& entry = rewards[k];
      const int agent = required<int>(entry, "agent");
      if (agent < 0 || agent >= n_agents) throw ConfigError(where + ": agent index out of range");
      const int s = state_of(entry, where);
      const int joint = joint_of(required<std::vector<int>>(entry, "actions"), where);
      reward[static_cast<std::size_t>(agent) * rows + static_cast<std::size_t>(s) * n_joint + joint] =
          required<double>(entry, "value");
    }
  }

  Parameterization param;
  if (doc.contains("policy")) {
    const json& policy = doc.at("policy");
    try {
      param.kind = parse_param_kind(required<std::string>(policy, "kind"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("game config: ") + e.what());
    }
    param.alpha = policy.value("alpha", 0.0);
  }

  try {
    TabularGame game(n_actions, n_states, std::move(transition), std::move(reward), gamma,
                     std::move(rho), reward_bound);
    const ValidationReport report = validate_game(game);
    if (!report.ok()) throw ConfigError("game config is invalid:\n" + report.summary());
    // Surface bad parameterizations (e.g. box with three actions) at load time.
    ParamSpace(param, n_states, n_actions);
    return GameDocument{std::move(game), param};
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("game config: ") + e.what());
  }
}

GameDocument load_game(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open game file: " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse game file " + path.string() + ": " + e.what());
  }
  return parse_game(doc);
}

json game_to_json(const TabularGame& game, const Parameterization& param) {
  json doc;
  doc["n_agents"] = game.n_agents();
  doc["n_states"] = game.n_states();
  doc["n_actions"] = std::vector<int>(game.action_counts().begin(), game.action_counts().end());
  doc["gamma"] = game.discount();
  doc["rho"] = std::vector<double>(game.initial_dist().begin(), game.initial_dist().end());
  doc["reward_bound"] = game.reward_bound();
  doc["policy"] = {{"kind", to_string(param.kind)}, {"alpha", param.alpha}};
  json transitions = json::array();
  json rewards = json::array();
  for (int s = 0; s < game.n_states(); ++s)
    for (int a = 0; a < game.n_joint(); ++a) {
      const auto row = game.transition_row(s, a);
      transitions.push_back({{"state", s},
                             {"actions", game.joint_actions(a)},
                             {"probs", std::vector<double>(row.begin(), row.end())}});
      for (int i = 0; i < game.n_agents(); ++i)
        if (game.reward(i, s, a) != 0.0)
          rewards.push_back({{"agent", i}, {"state", s}, {"actions", game.joint_actions(a)},
                             {"value", game.reward(i, s, a)}});
    }
  doc["transitions"] = std::move(transitions);
  doc["rewards"] = std::move(rewards);
  return doc;
}

}  // namespace nashvi
