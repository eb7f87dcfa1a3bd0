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

#include "nashvi/game.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nashvi {

std::string ValidationReport::summary() const {
  std::ostringstream out;
  for (const auto& v : violations) out << "error: " << v << '\n';
  for (const auto& w : warnings) out << "warning: " << w << '\n';
  return out.str();
}

TabularGame::TabularGame(std::vector<int> n_actions, int n_states,
                         std::vector<double> transition, std::vector<double> reward,
                         double discount, std::vector<double> initial_dist,
                         double reward_bound)
    : n_actions_(std::move(n_actions)),
      n_states_(n_states),
      n_joint_(1),
      transition_(std::move(transition)),
      reward_(std::move(reward)),
      discount_(discount),
      initial_dist_(std::move(initial_dist)),
      reward_bound_(reward_bound) {
  if (n_actions_.empty()) throw std::invalid_argument("game needs at least one agent");
  if (n_states_ <= 0) throw std::invalid_argument("game needs at least one state");
  strides_.reserve(n_actions_.size());
  for (int count : n_actions_) {
    if (count <= 0) throw std::invalid_argument("every agent needs at least one action");
    strides_.push_back(n_joint_);
    n_joint_ *= count;
  }
  const auto n = static_cast<std::size_t>(n_states_);
  const auto j = static_cast<std::size_t>(n_joint_);
  if (transition_.size() != n * j * n)
    throw std::invalid_argument("transition tensor has wrong size");
  if (reward_.size() != n_actions_.size() * n * j)
    throw std::invalid_argument("reward tensor has wrong size");
  if (initial_dist_.size() != n) throw std::invalid_argument("initial distribution has wrong size");
}

int TabularGame::joint_index(std::span<const int> actions) const {
  if (actions.size() != n_actions_.size())
    throw std::out_of_range("joint action has wrong number of components");
  int joint = 0;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i] < 0 || actions[i] >= n_actions_[i])
      throw std::out_of_range("action index out of range");
    joint += actions[i] * strides_[i];
  }
  return joint;
}

std::vector<int> TabularGame::joint_actions(int joint) const {
  std::vector<int> out(n_actions_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = agent_action(joint, static_cast<int>(i));
  return out;
}

TabularGame TabularGame::with_reward_shift(int agent, double offset) const {
  std::vector<double> shifted = reward_;
  const std::size_t block = static_cast<std::size_t>(n_states_) * n_joint_;
  for (std::size_t k = 0; k < block; ++k) shifted[static_cast<std::size_t>(agent) * block + k] += offset;
  return TabularGame(n_actions_, n_states_, transition_, std::move(shifted), discount_,
                     initial_dist_, reward_bound_ + std::abs(offset));
}

ValidationReport validate_game(const TabularGame& game) {
  ValidationReport report;
  const double gamma = game.discount();
  if (!(gamma > 0.0 && gamma < 1.0)) {
    std::ostringstream msg;
    msg << "discount out of range: gamma = " << gamma << " must lie in (0, 1)";
    report.fail(msg.str());
  }
  if (!(game.reward_bound() > 0.0)) report.fail("reward_bound must be positive");

  for (int s = 0; s < game.n_states(); ++s) {
    for (int a = 0; a < game.n_joint(); ++a) {
      double sum = 0.0;
      bool negative = false;
      for (double p : game.transition_row(s, a)) {
        sum += p;
        negative = negative || p < 0.0 || !std::isfinite(p);
      }
      if (negative) {
        std::ostringstream msg;
        msg << "transition row (state " << s << ", joint action " << a << ") has a negative entry";
        report.fail(msg.str());
      }
      if (std::abs(sum - 1.0) > kStochasticTolerance) {
        std::ostringstream msg;
        msg << "transition row (state " << s << ", joint action " << a
            << ") row sum != 1 (sum = " << sum << ")";
        report.fail(msg.str());
      }
    }
  }

  double rho_sum = 0.0;
  for (std::size_t s = 0; s < game.initial_dist().size(); ++s) {
    const double p = game.initial_dist()[s];
    rho_sum += p;
    if (p < 0.0 || !std::isfinite(p)) {
      std::ostringstream msg;
      msg << "initial_dist[" << s << "] is negative";
      report.fail(msg.str());
    }
  }
  if (std::abs(rho_sum - 1.0) > kStochasticTolerance) {
    std::ostringstream msg;
    msg << "initial_dist sum != 1 (sum = " << rho_sum << ")";
    report.fail(msg.str());
  }

  for (int i = 0; i < game.n_agents(); ++i) {
    for (int s = 0; s < game.n_states(); ++s) {
      for (int a = 0; a < game.n_joint(); ++a) {
        const double r = game.reward(i, s, a);
        if (!std::isfinite(r) || std::abs(r) > game.reward_bound()) {
          std::ostringstream msg;
          msg << "reward (agent " << i << ", state " << s << ", joint action " << a
              << ") = " << r << " exceeds reward_bound " << game.reward_bound();
          report.fail(msg.str());
        }
      }
    }
  }
  return report;
}

int sample_transition(const TabularGame& game, int s, int joint, Rng& rng) {
  if (s < 0 || s >= game.n_states()) throw std::out_of_range("state index out of range");
  if (joint < 0 || joint >= game.n_joint()) throw std::out_of_range("joint action out of range");
  return static_cast<int>(sample_categorical(game.transition_row(s, joint), rng));
}

int sample_initial(const TabularGame& game, Rng& rng) {
  return static_cast<int>(sample_categorical(game.initial_dist(), rng));
}

TabularGame two_player_example() {
  constexpr int kStates = 2;
  constexpr int kJoint = 4;
  // Joint index = a_0 + 2 * a_1.
  const double payoff0[kJoint] = {3.0, 0.0, 4.0, 2.0};
  const double payoff1[kJoint] = {3.0, 4.0, 0.0, 2.0};
  const double kernel[kStates][kStates] = {{0.6, 0.4}, {0.7, 0.3}};

  std::vector<double> transition;
  for (int s = 0; s < kStates; ++s)
    for (int a = 0; a < kJoint; ++a)
      for (int next = 0; next < kStates; ++next) transition.push_back(kernel[s][next]);

  std::vector<double> reward;
  for (const double* payoff : {payoff0, payoff1})
    for (int s = 0; s < kStates; ++s)
      for (int a = 0; a < kJoint; ++a) reward.push_back(payoff[a]);

  return TabularGame({2, 2}, kStates, std::move(transition), std::move(reward), 0.9, {0.5, 0.5},
                     4.0);
}

}  // namespace nashvi
