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

#include "nashvi/exact_eval.hpp"

#include <cmath>
#include <stdexcept>

namespace nashvi {

namespace {

void check_compatible(const TabularGame& game, const ParamSpace& space) {
  if (space.n_states() != game.n_states() || space.n_agents() != game.n_agents())
    throw std::invalid_argument("parameter space does not match the game");
  for (int i = 0; i < game.n_agents(); ++i)
    if (space.n_actions(i) != game.n_actions(i))
      throw std::invalid_argument("parameter space action counts do not match the game");
}

// Per agent, per state: pi_i(. | s).
std::vector<Eigen::MatrixXd> marginal_tables(const TabularGame& game, const PolicyParams& params) {
  std::vector<Eigen::MatrixXd> tables;
  tables.reserve(static_cast<std::size_t>(game.n_agents()));
  for (int i = 0; i < game.n_agents(); ++i) {
    Eigen::MatrixXd t(game.n_states(), game.n_actions(i));
    for (int s = 0; s < game.n_states(); ++s)
      for (int a = 0; a < game.n_actions(i); ++a) t(s, a) = action_prob(params, i, s, a);
    tables.push_back(std::move(t));
  }
  return tables;
}

Eigen::MatrixXd product_policy(const TabularGame& game, const std::vector<Eigen::MatrixXd>& tables,
                               int skip) {
  Eigen::MatrixXd out(game.n_states(), game.n_joint());
  for (int s = 0; s < game.n_states(); ++s) {
    for (int a = 0; a < game.n_joint(); ++a) {
      double p = 1.0;
      for (int i = 0; i < game.n_agents(); ++i)
        if (i != skip) p *= tables[static_cast<std::size_t>(i)](s, game.agent_action(a, i));
      out(s, a) = p;
    }
  }
  return out;
}

Eigen::MatrixXd kernel_from(const TabularGame& game, const Eigen::MatrixXd& pi) {
  const int n = game.n_states();
  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(n, n);
  for (int s = 0; s < n; ++s)
    for (int a = 0; a < game.n_joint(); ++a) {
      const double p = pi(s, a);
      if (p == 0.0) continue;
      const auto row = game.transition_row(s, a);
      for (int next = 0; next < n; ++next) kernel(s, next) += p * row[static_cast<std::size_t>(next)];
    }
  return kernel;
}

Eigen::VectorXd reward_from(const TabularGame& game, const Eigen::MatrixXd& pi, int agent) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(game.n_states());
  for (int s = 0; s < game.n_states(); ++s)
    for (int a = 0; a < game.n_joint(); ++a) r(s) += pi(s, a) * game.reward(agent, s, a);
  return r;
}

Eigen::MatrixXd q_from(const TabularGame& game, const Eigen::VectorXd& value, int agent) {
  Eigen::MatrixXd q(game.n_states(), game.n_joint());
  for (int s = 0; s < game.n_states(); ++s)
    for (int a = 0; a < game.n_joint(); ++a) {
      const auto row = game.transition_row(s, a);
      double future = 0.0;
      for (int next = 0; next < game.n_states(); ++next)
        future += row[static_cast<std::size_t>(next)] * value(next);
      q(s, a) = game.reward(agent, s, a) + game.discount() * future;
    }
  return q;
}

Eigen::PartialPivLU<Eigen::MatrixXd> factor(const TabularGame& game, const Eigen::MatrixXd& kernel) {
  const int n = game.n_states();
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - game.discount() * kernel;
  return Eigen::PartialPivLU<Eigen::MatrixXd>(system);
}

void check_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw std::runtime_error(std::string("linear solve failed for ") + what);
}

}  // namespace

Eigen::MatrixXd joint_policy(const TabularGame& game, const PolicyParams& params) {
  check_compatible(game, params.space());
  return product_policy(game, marginal_tables(game, params), -1);
}

Eigen::MatrixXd opponent_policy(const TabularGame& game, const PolicyParams& params, int agent) {
  check_compatible(game, params.space());
  return product_policy(game, marginal_tables(game, params), agent);
}

Eigen::MatrixXd induced_kernel(const TabularGame& game, const PolicyParams& params) {
  return kernel_from(game, joint_policy(game, params));
}

Eigen::VectorXd induced_reward(const TabularGame& game, const PolicyParams& params, int agent) {
  return reward_from(game, joint_policy(game, params), agent);
}

Eigen::VectorXd value_function(const TabularGame& game, const PolicyParams& params, int agent) {
  const Eigen::MatrixXd pi = joint_policy(game, params);
  Eigen::VectorXd v = factor(game, kernel_from(game, pi)).solve(reward_from(game, pi, agent));
  check_finite(v, "value function");
  return v;
}

Eigen::MatrixXd action_value(const TabularGame& game, const PolicyParams& params, int agent) {
  return q_from(game, value_function(game, params, agent), agent);
}

Eigen::VectorXd discounted_occupancy(const TabularGame& game, const PolicyParams& params) {
  const Eigen::MatrixXd kernel = induced_kernel(game, params);
  const int n = game.n_states();
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - game.discount() * kernel.transpose();
  Eigen::VectorXd rho(n);
  for (int s = 0; s < n; ++s) rho(s) = game.initial_dist()[static_cast<std::size_t>(s)];
  Eigen::VectorXd d = (1.0 - game.discount()) * system.partialPivLu().solve(rho);
  check_finite(d, "occupancy");
  return d;
}

double total_reward(const TabularGame& game, const PolicyParams& params, int agent) {
  const Eigen::VectorXd v = value_function(game, params, agent);
  double j = 0.0;
  for (int s = 0; s < game.n_states(); ++s) j += game.initial_dist()[static_cast<std::size_t>(s)] * v(s);
  return j;
}

FieldEvaluation FieldEvaluation::evaluate(const TabularGame& game, const PolicyParams& params) {
  const ParamSpace& space = params.space();
  check_compatible(game, space);
  const int n = game.n_states();
  const double gamma = game.discount();
  const auto tables = marginal_tables(game, params);
  const Eigen::MatrixXd pi = product_policy(game, tables, -1);
  const Eigen::MatrixXd kernel = kernel_from(game, pi);
  const auto lu = factor(game, kernel);

  FieldEvaluation eval;
  Eigen::VectorXd rho(n);
  for (int s = 0; s < n; ++s) rho(s) = game.initial_dist()[static_cast<std::size_t>(s)];
  const Eigen::MatrixXd adjoint = Eigen::MatrixXd::Identity(n, n) - gamma * kernel.transpose();
  eval.occupancy = (1.0 - gamma) * adjoint.partialPivLu().solve(rho);
  check_finite(eval.occupancy, "occupancy");

  eval.gradient.assign(space.dim(), 0.0);
  for (int i = 0; i < game.n_agents(); ++i) {
    Eigen::VectorXd v = lu.solve(reward_from(game, pi, i));
    check_finite(v, "value function");
    Eigen::MatrixXd q = q_from(game, v, i);
    eval.total_reward.push_back(rho.dot(v));

    const Eigen::MatrixXd others = product_policy(game, tables, i);
    for (int s = 0; s < n; ++s) {
      const double weight = eval.occupancy(s) / (1.0 - gamma);
      for (int c = 0; c < space.block_size(i); ++c) {
        double acc = 0.0;
        for (int a = 0; a < game.n_joint(); ++a) {
          const double slope = space.prob_slope(i, game.agent_action(a, i), c);
          if (slope != 0.0) acc += slope * others(s, a) * q(s, a);
        }
        eval.gradient[space.index(i, s, c)] = weight * acc;
      }
    }
    eval.value.push_back(std::move(v));
    eval.qvalue.push_back(std::move(q));
  }
  eval.field.resize(eval.gradient.size());
  for (std::size_t k = 0; k < eval.gradient.size(); ++k) eval.field[k] = -eval.gradient[k];
  return eval;
}

std::vector<double> pseudo_gradient(const TabularGame& game, const PolicyParams& params) {
  return FieldEvaluation::evaluate(game, params).field;
}

double lipschitz_bound(double reward_bound, double score_lipschitz, double score_bound,
                       int n_agents, double gamma) {
  if (!(reward_bound >= 0.0) || !(score_lipschitz >= 0.0) || !(score_bound >= 0.0) || n_agents <= 0)
    throw std::domain_error("lipschitz_bound: inputs must be nonnegative with N >= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::domain_error("lipschitz_bound: gamma must lie in (0, 1)");
  const double scale = std::pow(1.0 - gamma, 6);
  const double u2 = reward_bound * reward_bound;
  const double first = 2.0 * u2 * score_lipschitz * score_lipschitz / scale;
  const double second = 2.0 * (1.0 + gamma) * (1.0 + gamma) * u2 * n_agents *
                        std::pow(score_bound, 4) / scale;
  return std::sqrt(first + second);
}

RegularizedField::RegularizedField(FieldFn base, double beta, std::vector<double> center)
    : base_(std::move(base)), beta_(beta), center_(std::move(center)) {
  if (!(beta_ > 0.0)) throw std::invalid_argument("regularized field: beta must be positive");
}

RegularizedField::RegularizedField(FieldFn base, double beta, std::vector<double> center,
                                   double lipschitz)
    : RegularizedField(std::move(base), beta, std::move(center)) {
  if (!(beta_ * lipschitz < 1.0))
    throw std::invalid_argument("regularized field: beta must lie in (0, 1/L)");
}

std::vector<double> RegularizedField::regularize(std::span<const double> theta,
                                                 std::span<const double> base) const {
  std::vector<double> out(base.begin(), base.end());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += (theta[k] - center_[k]) / beta_;
  return out;
}

std::vector<double> RegularizedField::operator()(std::span<const double> theta) const {
  if (theta.size() != center_.size()) throw std::invalid_argument("regularized field: dimension mismatch");
  return regularize(theta, base_(theta));
}

FieldFn exact_field(const TabularGame& game, const ParamSpace& space) {
  check_compatible(game, space);
  return [&game, space](std::span<const double> theta) {
    PolicyParams params(space, std::vector<double>(theta.begin(), theta.end()));
    return FieldEvaluation::evaluate(game, params).field;
  };
}

}  // namespace nashvi
