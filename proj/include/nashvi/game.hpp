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

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nashvi/rng.hpp"

namespace nashvi {

/// Accumulates invariant violations instead of throwing on the first one.
struct ValidationReport {
  std::vector<std::string> violations;
  std::vector<std::string> warnings;

  bool ok() const { return violations.empty(); }
  void fail(std::string message) { violations.push_back(std::move(message)); }
  void warn(std::string message) { warnings.push_back(std::move(message)); }
  std::string summary() const;
};

/// Finite discounted stochastic game with a time-homogeneous kernel.
///
/// Joint actions are flattened with agent 0 varying fastest:
///   joint = a_0 + |A_0| * (a_1 + |A_1| * (a_2 + ...)).
/// Transition rows are stored as [(s * n_joint + joint) * n_states + s'] and
/// rewards as [(i * n_states + s) * n_joint + joint].
class TabularGame {
 public:
  TabularGame(std::vector<int> n_actions, int n_states, std::vector<double> transition,
              std::vector<double> reward, double discount, std::vector<double> initial_dist,
              double reward_bound);

  int n_agents() const { return static_cast<int>(n_actions_.size()); }
  int n_states() const { return n_states_; }
  int n_actions(int agent) const { return n_actions_.at(static_cast<std::size_t>(agent)); }
  std::span<const int> action_counts() const { return n_actions_; }
  int n_joint() const { return n_joint_; }
  double discount() const { return discount_; }
  double reward_bound() const { return reward_bound_; }
  std::span<const double> initial_dist() const { return initial_dist_; }

  std::span<const double> transition_row(int s, int joint) const {
    return {transition_.data() + row_offset(s, joint), static_cast<std::size_t>(n_states_)};
  }
  double transition(int s, int joint, int next) const {
    return transition_[row_offset(s, joint) + static_cast<std::size_t>(next)];
  }
  double reward(int agent, int s, int joint) const {
    return reward_[(static_cast<std::size_t>(agent) * n_states_ + s) * n_joint_ + joint];
  }
  std::span<const double> raw_transitions() const { return transition_; }
  std::span<const double> raw_rewards() const { return reward_; }

  int joint_index(std::span<const int> actions) const;
  /// Component of agent `agent` inside a flattened joint action.
  int agent_action(int joint, int agent) const {
    return (joint / strides_[static_cast<std::size_t>(agent)]) %
           n_actions_[static_cast<std::size_t>(agent)];
  }
  std::vector<int> joint_actions(int joint) const;

  /// Same game with every reward of `agent` shifted by `offset`.
  TabularGame with_reward_shift(int agent, double offset) const;

 private:
  std::size_t row_offset(int s, int joint) const {
    return (static_cast<std::size_t>(s) * n_joint_ + joint) * n_states_;
  }

  std::vector<int> n_actions_;
  std::vector<int> strides_;
  int n_states_;
  int n_joint_;
  std::vector<double> transition_;
  std::vector<double> reward_;
  double discount_;
  std::vector<double> initial_dist_;
  double reward_bound_;
};

inline constexpr double kStochasticTolerance = 1e-12;

ValidationReport validate_game(const TabularGame& game);

/// Draws s' ~ P(.|s, joint). Throws std::out_of_range on bad indices.
int sample_transition(const TabularGame& game, int s, int joint, Rng& rng);

/// Draws s(0) ~ rho.
int sample_initial(const TabularGame& game, Rng& rng);

/// The two-agent, two-state, two-action example game: state-independent
/// rewards (3,3) (4,0) / (0,4) (2,2), action-independent kernel rows
/// (0.6, 0.4) and (0.7, 0.3), gamma = 0.9, rho = (0.5, 0.5).
TabularGame two_player_example();

}  // namespace nashvi
