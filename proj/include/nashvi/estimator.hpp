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

#include <cstdint>
#include <span>
#include <vector>

#include "nashvi/game.hpp"
#include "nashvi/policy.hpp"
#include "nashvi/rng.hpp"

namespace nashvi {

/// Finite-horizon rollout: steps 0..horizon inclusive.
struct Trajectory {
  int horizon = 0;
  std::uint64_t seed_id = 0;
  std::vector<int> states;         // horizon + 1
  std::vector<int> joint_actions;  // horizon + 1
  std::vector<double> rewards;     // (horizon + 1) * n_agents, step-major

  std::size_t length() const { return states.size(); }
  double reward(std::size_t step, int agent, int n_agents) const {
    return rewards[step * static_cast<std::size_t>(n_agents) + static_cast<std::size_t>(agent)];
  }
};

Trajectory rollout(const TabularGame& game, const PolicyParams& params, int horizon, Rng& rng);

struct GradientEstimate {
  std::vector<double> gradient;  // concatenated estimates of grad_{theta_i} J_i
  int horizon = 0;
  int n_trajectories = 0;
  std::uint64_t seed = 0;
  /// Largest ||grad log pi_i(a_i | s)|| met along the sampled trajectories.
  double max_score_norm = 0.0;
  /// Largest per-agent norm of a single trajectory's contribution.
  double max_contribution_norm = 0.0;

  std::vector<double> field() const;
};

/// G(PO)MDP estimate averaged over `n_trajectories` rollouts. Trajectory j
/// draws from substream(seed, kTrajectory, j), and the average is reduced in
/// trajectory order, so the result is bit-identical for any thread count.
GradientEstimate gpomdp_estimate(const TabularGame& game, const PolicyParams& params, int horizon,
                                 int n_trajectories, std::uint64_t seed);

namespace reference {

/// Single-threaded estimator kept as the oracle for the parallel kernel.
GradientEstimate gpomdp_estimate_serial(const TabularGame& game, const PolicyParams& params,
                                        int horizon, int n_trajectories, std::uint64_t seed);

}  // namespace reference

/// Rng for trajectory `index` of the estimator call seeded with `seed`.
inline Rng trajectory_rng(std::uint64_t seed, std::uint64_t index) {
  return substream(seed, Stream::kTrajectory, index);
}

/// Seed of the `call`-th estimator invocation of a run seeded with `run_seed`.
inline std::uint64_t estimator_call_seed(std::uint64_t run_seed, std::uint64_t call) {
  return substream(run_seed, Stream::kEstimatorCall, call)();
}

/// Squared-norm truncation bias term
///   sigma_T = 2N (B U)^2 [((T+1)/(1-g) + g/(1-g)^2) g^(T+1)]^2.
double truncation_bound(int n_agents, double score_bound, double reward_bound, double gamma,
                        int horizon);

/// High-probability bound M(T, K1, delta) on ||F_hat - F||^2:
///   sigma_T + 16 log(8 K1 / delta) N B^2 U^2 g^2 / ((1-g)^4 K1).
double error_bound(int horizon, int n_trajectories, double delta, int n_agents,
                   double score_bound, double reward_bound, double gamma);

}  // namespace nashvi
