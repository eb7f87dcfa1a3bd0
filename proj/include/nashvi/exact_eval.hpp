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

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "nashvi/game.hpp"
#include "nashvi/policy.hpp"

namespace nashvi {

/// pi_theta(a | s) for every state and joint action, row-major (s, joint).
Eigen::MatrixXd joint_policy(const TabularGame& game, const PolicyParams& params);

/// prod_{j != agent} pi_j(a_j | s) for every (s, joint).
Eigen::MatrixXd opponent_policy(const TabularGame& game, const PolicyParams& params, int agent);

/// P^pi(s' | s) = sum_a pi(a | s) P(s' | s, a).
Eigen::MatrixXd induced_kernel(const TabularGame& game, const PolicyParams& params);

/// r_i^pi(s) = sum_a pi(a | s) r_i(s, a).
Eigen::VectorXd induced_reward(const TabularGame& game, const PolicyParams& params, int agent);

/// Solves (I - gamma P^pi) V = r_i^pi.
Eigen::VectorXd value_function(const TabularGame& game, const PolicyParams& params, int agent);

/// Q_i(s, a) = r_i(s, a) + gamma sum_s' P(s' | s, a) V_i(s'); rows are states.
Eigen::MatrixXd action_value(const TabularGame& game, const PolicyParams& params, int agent);

/// d = (1 - gamma) rho^T (I - gamma P^pi)^{-1}.
Eigen::VectorXd discounted_occupancy(const TabularGame& game, const PolicyParams& params);

/// J_i = sum_s rho(s) V_i(s).
double total_reward(const TabularGame& game, const PolicyParams& params, int agent);

/// F(theta) = (-grad_{theta_i} J_i)_i in the flat parameter layout.
std::vector<double> pseudo_gradient(const TabularGame& game, const PolicyParams& params);

/// Every exact quantity at one theta, sharing a single factorization.
struct FieldEvaluation {
  std::vector<Eigen::VectorXd> value;    // per agent, over states
  std::vector<Eigen::MatrixXd> qvalue;   // per agent, (state, joint)
  Eigen::VectorXd occupancy;
  std::vector<double> total_reward;      // per agent
  std::vector<double> gradient;          // concatenated grad_{theta_i} J_i
  std::vector<double> field;             // -gradient

  static FieldEvaluation evaluate(const TabularGame& game, const PolicyParams& params);
};

/// Lipschitz constant of F under bounded score Lipschitzness L_Theta and
/// score bound B_Theta:
///   sqrt(2 U^2 L_T^2 / (1-g)^6 + 2 (1+g)^2 U^2 N B_T^4 / (1-g)^6).
double lipschitz_bound(double reward_bound, double score_lipschitz, double score_bound,
                       int n_agents, double gamma);

using FieldFn = std::function<std::vector<double>(std::span<const double>)>;

/// F_k(theta) = F(theta) + (theta - center) / beta.
class RegularizedField {
 public:
  RegularizedField(FieldFn base, double beta, std::vector<double> center);

  /// Also checks beta < 1 / lipschitz.
  RegularizedField(FieldFn base, double beta, std::vector<double> center, double lipschitz);

  std::vector<double> operator()(std::span<const double> theta) const;
  /// Adds the proximal term to an already-computed base value.
  std::vector<double> regularize(std::span<const double> theta, std::span<const double> base) const;

  double beta() const { return beta_; }
  std::span<const double> center() const { return center_; }

 private:
  FieldFn base_;
  double beta_;
  std::vector<double> center_;
};

/// Exact F as a FieldFn over raw (feasible) parameter vectors.
FieldFn exact_field(const TabularGame& game, const ParamSpace& space);

}  // namespace nashvi
