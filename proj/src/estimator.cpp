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

#include "nashvi/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nashvi/parallel.hpp"

namespace nashvi {

Trajectory rollout(const TabularGame& game, const PolicyParams& params, int horizon, Rng& rng) {
  if (horizon < 0) throw std::invalid_argument("rollout: horizon must be nonnegative");
  const int n_agents = game.n_agents();
  Trajectory traj;
  traj.horizon = horizon;
  traj.states.reserve(static_cast<std::size_t>(horizon) + 1);
  traj.joint_actions.reserve(static_cast<std::size_t>(horizon) + 1);
  traj.rewards.reserve(static_cast<std::size_t>(horizon + 1) * n_agents);

  std::vector<int> actions(static_cast<std::size_t>(n_agents));
  int s = sample_initial(game, rng);
  for (int step = 0; step <= horizon; ++step) {
    for (int i = 0; i < n_agents; ++i) actions[static_cast<std::size_t>(i)] = sample_action(params, i, s, rng);
    const int joint = game.joint_index(actions);
    traj.states.push_back(s);
    traj.joint_actions.push_back(joint);
    for (int i = 0; i < n_agents; ++i) traj.rewards.push_back(game.reward(i, s, joint));
    if (step < horizon) s = sample_transition(game, s, joint, rng);
  }
  return traj;
}

std::vector<double> GradientEstimate::field() const {
  std::vector<double> out(gradient.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = -gradient[k];
  return out;
}

namespace {

void check_arguments(const PolicyParams& params, int horizon, int n_trajectories) {
  if (horizon < 0) throw std::invalid_argument("gpomdp_estimate: horizon must be nonnegative");
  if (n_trajectories < 1) throw std::invalid_argument("gpomdp_estimate: need at least one trajectory");
  (void)params;
}

// Flattened action probabilities and score slopes for allocation-free rollouts.
class SamplingTables {
 public:
  SamplingTables(const TabularGame& game, const PolicyParams& params) : space_(params.space()) {
    for (int i = 0; i < game.n_agents(); ++i) {
      const int n_actions = game.n_actions(i);
      const int block = space_.block_size(i);
      std::vector<double> probs;
      std::vector<double> scores;
      std::vector<double> score_norms;
      for (int s = 0; s < game.n_states(); ++s) {
        for (int a = 0; a < n_actions; ++a) probs.push_back(action_prob(params, i, s, a));
      }
      for (int s = 0; s < game.n_states(); ++s) {
        for (int a = 0; a < n_actions; ++a) {
          const double p = probs[static_cast<std::size_t>(s * n_actions + a)];
          double norm2 = 0.0;
          for (int c = 0; c < block; ++c) {
            const double slope = space_.prob_slope(i, a, c);
            // Zero-probability actions are never sampled; keep the slot finite.
            const double score = p > 0.0 ? slope / p : 0.0;
            scores.push_back(score);
            norm2 += score * score;
          }
          score_norms.push_back(std::sqrt(norm2));
        }
      }
      probs_.push_back(std::move(probs));
      scores_.push_back(std::move(scores));
      score_norms_.push_back(std::move(score_norms));
    }
  }

  std::span<const double> probs(int agent, int s, int n_actions) const {
    return std::span<const double>(probs_[static_cast<std::size_t>(agent)])
        .subspan(static_cast<std::size_t>(s * n_actions), static_cast<std::size_t>(n_actions));
  }
  const double* score(int agent, int s, int a, int n_actions) const {
    const int block = space_.block_size(agent);
    return scores_[static_cast<std::size_t>(agent)].data() +
           static_cast<std::size_t>((s * n_actions + a) * block);
  }
  double score_norm(int agent, int s, int a, int n_actions) const {
    return score_norms_[static_cast<std::size_t>(agent)][static_cast<std::size_t>(s * n_actions + a)];
  }
  const ParamSpace& space() const { return space_; }

 private:
  const ParamSpace& space_;
  std::vector<std::vector<double>> probs_;
  std::vector<std::vector<double>> scores_;
  std::vector<std::vector<double>> score_norms_;
};

struct ContributionStats {
  double max_score_norm = 0.0;
  double max_contribution_norm = 0.0;
};

// One trajectory's G(PO)MDP term, written into `out` (size dim). `score` is
// scratch of size dim. Consumes the rng exactly like rollout().
ContributionStats accumulate_trajectory(const TabularGame& game, const SamplingTables& tables,
                                        int horizon, Rng& rng, std::span<double> out,
                                        std::span<double> score, std::vector<int>& actions) {
  const ParamSpace& space = tables.space();
  const int n_agents = game.n_agents();
  std::fill(out.begin(), out.end(), 0.0);
  std::fill(score.begin(), score.end(), 0.0);
  ContributionStats stats;

  double discount = 1.0;
  int s = sample_initial(game, rng);
  for (int step = 0; step <= horizon; ++step) {
    for (int i = 0; i < n_agents; ++i) {
      const int n_actions = game.n_actions(i);
      actions[static_cast<std::size_t>(i)] =
          static_cast<int>(sample_categorical(tables.probs(i, s, n_actions), rng));
    }
    const int joint = game.joint_index(actions);
    for (int i = 0; i < n_agents; ++i) {
      const int n_actions = game.n_actions(i);
      const int a = actions[static_cast<std::size_t>(i)];
      const int block = space.block_size(i);
      const double* step_score = tables.score(i, s, a, n_actions);
      const std::size_t base = space.index(i, s, 0);
      for (int c = 0; c < block; ++c) score[base + static_cast<std::size_t>(c)] += step_score[c];
      stats.max_score_norm = std::max(stats.max_score_norm, tables.score_norm(i, s, a, n_actions));

      const double weight = discount * game.reward(i, s, joint);
      if (weight != 0.0) {
        const std::size_t begin = space.agent_offset(i);
        const std::size_t end = begin + space.agent_dim(i);
        for (std::size_t k = begin; k < end; ++k) out[k] += weight * score[k];
      }
    }
    discount *= game.discount();
    if (step < horizon) s = sample_transition(game, s, joint, rng);
  }

  for (int i = 0; i < n_agents; ++i) {
    double norm2 = 0.0;
    const std::size_t begin = space.agent_offset(i);
    for (std::size_t k = begin; k < begin + space.agent_dim(i); ++k) norm2 += out[k] * out[k];
    stats.max_contribution_norm = std::max(stats.max_contribution_norm, std::sqrt(norm2));
  }
  return stats;
}

}  // namespace

GradientEstimate gpomdp_estimate(const TabularGame& game, const PolicyParams& params, int horizon,
                                 int n_trajectories, std::uint64_t seed) {
  check_arguments(params, horizon, n_trajectories);
  const SamplingTables tables(game, params);
  const std::size_t dim = params.space().dim();
  const auto count = static_cast<std::size_t>(n_trajectories);

  std::vector<double> contributions(count * dim);
  std::vector<ContributionStats> stats(count);

  const int threads = parallel::effective_threads();
#pragma omp parallel num_threads(threads) if (n_trajectories > 1)
  {
    std::vector<double> score(dim);
    std::vector<int> actions(static_cast<std::size_t>(game.n_agents()));
#pragma omp for schedule(static)
    for (long j = 0; j < static_cast<long>(count); ++j) {
      Rng rng = trajectory_rng(seed, static_cast<std::uint64_t>(j));
      std::span<double> out(contributions.data() + static_cast<std::size_t>(j) * dim, dim);
      stats[static_cast<std::size_t>(j)] =
          accumulate_trajectory(game, tables, horizon, rng, out, score, actions);
    }
  }

  // Fixed reduction order: trajectory index ascending.
  GradientEstimate estimate;
  estimate.gradient.assign(dim, 0.0);
  estimate.horizon = horizon;
  estimate.n_trajectories = n_trajectories;
  estimate.seed = seed;
  for (std::size_t j = 0; j < count; ++j) {
    const double* row = contributions.data() + j * dim;
    for (std::size_t k = 0; k < dim; ++k) estimate.gradient[k] += row[k];
    estimate.max_score_norm = std::max(estimate.max_score_norm, stats[j].max_score_norm);
    estimate.max_contribution_norm =
        std::max(estimate.max_contribution_norm, stats[j].max_contribution_norm);
  }
  for (double& g : estimate.gradient) g /= static_cast<double>(count);
  return estimate;
}

namespace reference {

GradientEstimate gpomdp_estimate_serial(const TabularGame& game, const PolicyParams& params,
                                        int horizon, int n_trajectories, std::uint64_t seed) {
  check_arguments(params, horizon, n_trajectories);
  const ParamSpace& space = params.space();
  const int n_agents = game.n_agents();
  GradientEstimate estimate;
  estimate.gradient.assign(space.dim(), 0.0);
  estimate.horizon = horizon;
  estimate.n_trajectories = n_trajectories;
  estimate.seed = seed;

  for (int j = 0; j < n_trajectories; ++j) {
    Rng rng = trajectory_rng(seed, static_cast<std::uint64_t>(j));
    const Trajectory traj = rollout(game, params, horizon, rng);
    std::vector<double> contribution(space.dim(), 0.0);
    std::vector<double> score(space.dim(), 0.0);
    double discount = 1.0;
    for (std::size_t step = 0; step < traj.length(); ++step) {
      const int s = traj.states[step];
      const int joint = traj.joint_actions[step];
      for (int i = 0; i < n_agents; ++i) {
        const auto g = grad_log_prob(params, i, s, game.agent_action(joint, i));
        double norm2 = 0.0;
        for (std::size_t c = 0; c < g.size(); ++c) {
          score[space.agent_offset(i) + c] += g[c];
          norm2 += g[c] * g[c];
        }
        estimate.max_score_norm = std::max(estimate.max_score_norm, std::sqrt(norm2));
        const double weight = discount * traj.reward(step, i, n_agents);
        if (weight != 0.0)
          for (std::size_t k = space.agent_offset(i); k < space.agent_offset(i) + space.agent_dim(i); ++k)
            contribution[k] += weight * score[k];
      }
      discount *= game.discount();
    }
    for (int i = 0; i < n_agents; ++i) {
      double norm2 = 0.0;
      for (std::size_t k = space.agent_offset(i); k < space.agent_offset(i) + space.agent_dim(i); ++k)
        norm2 += contribution[k] * contribution[k];
      estimate.max_contribution_norm = std::max(estimate.max_contribution_norm, std::sqrt(norm2));
    }
    for (std::size_t k = 0; k < space.dim(); ++k) estimate.gradient[k] += contribution[k];
  }
  for (double& g : estimate.gradient) g /= static_cast<double>(n_trajectories);
  return estimate;
}

}  // namespace reference

double truncation_bound(int n_agents, double score_bound, double reward_bound, double gamma,
                        int horizon) {
  if (n_agents <= 0 || !(score_bound >= 0.0) || !(reward_bound >= 0.0) || horizon < 0)
    throw std::domain_error("truncation_bound: invalid inputs");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::domain_error("truncation_bound: gamma must lie in (0, 1)");
  const double tail = ((horizon + 1.0) / (1.0 - gamma) + gamma / ((1.0 - gamma) * (1.0 - gamma))) *
                      std::pow(gamma, horizon + 1.0);
  const double scale = score_bound * reward_bound;
  return 2.0 * n_agents * scale * scale * tail * tail;
}

double error_bound(int horizon, int n_trajectories, double delta, int n_agents,
                   double score_bound, double reward_bound, double gamma) {
  if (n_trajectories < 1) throw std::domain_error("error_bound: need K1 >= 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw std::domain_error("error_bound: delta must lie in (0, 1]");
  const double sigma = truncation_bound(n_agents, score_bound, reward_bound, gamma, horizon);
  const double k1 = static_cast<double>(n_trajectories);
  const double concentration = 16.0 * std::log(8.0 * k1 / delta) * n_agents * score_bound *
                               score_bound * reward_bound * reward_bound * gamma * gamma /
                               (std::pow(1.0 - gamma, 4) * k1);
  return sigma + concentration;
}

}  // namespace nashvi
