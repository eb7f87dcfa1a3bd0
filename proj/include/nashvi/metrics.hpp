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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nashvi/game.hpp"
#include "nashvi/policy.hpp"

namespace nashvi {

struct BestResponse {
  double value = 0.0;
  std::vector<int> rule;  // optimal deterministic action per state
  int iterations = 0;     // policy-iteration sweeps
};

/// sup over Theta_i of J_i(theta_i, theta_{-i}). Solves the agent's MDP
/// against the fixed opponents by policy iteration over deterministic rules
/// (lowest index wins ties) and evaluates the matching vertex of Theta_i
/// (alpha-smoothed for AlphaGreedy and TwoActionBox) exactly.
BestResponse best_response(const TabularGame& game, const PolicyParams& params, int agent);

inline double best_response_value(const TabularGame& game, const PolicyParams& params, int agent) {
  return best_response(game, params, agent).value;
}

struct NashGap {
  std::vector<double> per_agent;
  std::vector<double> best_response;
  std::vector<double> total_reward;
  double sup = 0.0;
};

NashGap nash_gap(const TabularGame& game, const PolicyParams& params);

/// eps_K = sum_{k<=K} k^e g(k) / sum_{k<=K} k^e for every prefix K, with
/// Neumaier-compensated sums.
std::vector<double> weighted_gap(std::span<const double> gaps, double exponent);

/// Per outer iterate k = 1..K: gaps, sup-gap, and the weighted aggregate
///   eps_K = max_i sum_k k^e gap_i(k) / sum_k k^e.
struct GapReport {
  int n_agents = 0;
  double exponent = 0.5;
  std::vector<std::vector<double>> gaps;  // [k][agent]
  std::vector<double> sup_gap;            // [k]
  std::vector<double> eps;                // [K - 1]

  std::size_t size() const { return sup_gap.size(); }
};

GapReport gap_report(const TabularGame& game, const ParamSpace& space,
                     std::span<const std::vector<double>> iterates, double exponent);

/// max over theta in Theta of <g, theta>, attained at a vertex.
double linear_max(const ParamSpace& space, std::span<const double> g);
/// Same, restricted to one agent's block (g has that agent's dimension).
double linear_max_agent(const ParamSpace& space, int agent, std::span<const double> g);

/// sup_theta <F(theta_hat), theta_hat - theta>.
double svi_prime_gap(const TabularGame& game, const PolicyParams& params);

struct MviResidual {
  double residual = 0.0;           // min over points of <F(theta), theta - theta*>
  std::vector<double> worst_point;
  std::size_t points = 0;
};

/// Minty residual of `candidate` on the supplied sample points, in the
/// orientation where a solution gives a nonnegative value:
///   min_theta <F(theta), theta - theta*>.
MviResidual mvi_residual(const TabularGame& game, const PolicyParams& candidate,
                         std::span<const std::vector<double>> points);

/// Regular grid over Theta: `per_axis` points per box coordinate, or every
/// simplex point with denominators per_axis - 1 for simplex blocks.
std::vector<std::vector<double>> parameter_grid(const ParamSpace& space, int per_axis);

/// Uniform samples from Theta (flat Dirichlet for simplex blocks).
std::vector<std::vector<double>> random_points(const ParamSpace& space, std::size_t count, Rng& rng);

struct DominationCheck {
  bool holds = true;
  double worst_slack = 0.0;  // min_i M1 * sup <F_i, theta_i - theta_bar_i> - gap_i
  int worst_agent = 0;
};

DominationCheck gradient_domination_check(const TabularGame& game, const PolicyParams& params,
                                          double m1, double tolerance = 1e-9);

/// First deterministic profile (lexicographic over agents' rules) whose
/// Nash gap is at most `tolerance`, if any. Exhaustive; meant for small games.
std::optional<PolicyParams> enumerate_pure_equilibrium(const TabularGame& game,
                                                       const ParamSpace& space,
                                                       double tolerance = 1e-9);

}  // namespace nashvi
