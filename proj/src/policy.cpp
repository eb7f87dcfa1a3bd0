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

#include "nashvi/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace nashvi {

std::string to_string(ParamKind kind) {
  switch (kind) {
    case ParamKind::kDirect: return "direct";
    case ParamKind::kAlphaGreedy: return "alpha_greedy";
    case ParamKind::kTwoActionBox: return "two_action_box";
  }
  return "unknown";
}

ParamKind parse_param_kind(const std::string& name) {
  if (name == "direct") return ParamKind::kDirect;
  if (name == "alpha_greedy") return ParamKind::kAlphaGreedy;
  if (name == "two_action_box") return ParamKind::kTwoActionBox;
  throw std::invalid_argument("unknown parameterization kind: " + name);
}

ParamSpace::ParamSpace(Parameterization param, int n_states, std::vector<int> n_actions)
    : param_(param), n_states_(n_states), n_actions_(std::move(n_actions)) {
  if (n_states_ <= 0 || n_actions_.empty())
    throw std::invalid_argument("parameter space needs states and agents");
  switch (param_.kind) {
    case ParamKind::kDirect:
      if (param_.alpha != 0.0) throw std::invalid_argument("direct parameterization takes alpha = 0");
      break;
    case ParamKind::kAlphaGreedy:
      if (!(param_.alpha > 0.0 && param_.alpha < 1.0))
        throw std::invalid_argument("alpha-greedy needs alpha in (0, 1)");
      break;
    case ParamKind::kTwoActionBox:
      if (!(param_.alpha >= 0.0 && param_.alpha < 1.0))
        throw std::invalid_argument("two-action box needs alpha in [0, 1)");
      for (int count : n_actions_)
        if (count != 2) throw std::invalid_argument("two-action box needs exactly two actions per agent");
      break;
  }
  offsets_.assign(1, 0);
  for (int i = 0; i < n_agents(); ++i)
    offsets_.push_back(offsets_.back() + static_cast<std::size_t>(n_states_ * block_size(i)));
}

double ParamSpace::prob_slope(int agent, int a, int c) const {
  switch (param_.kind) {
    case ParamKind::kDirect: return a == c ? 1.0 : 0.0;
    case ParamKind::kAlphaGreedy: return a == c ? 1.0 - param_.alpha : 0.0;
    case ParamKind::kTwoActionBox: return a == 0 ? 1.0 - param_.alpha : -(1.0 - param_.alpha);
  }
  (void)agent;
  return 0.0;
}

double ParamSpace::diameter() const {
  // Simplex diameter is sqrt(2) per state, unit interval 1 per state.
  const double per_state = param_.kind == ParamKind::kTwoActionBox ? 1.0 : 2.0;
  double sum = 0.0;
  for (int i = 0; i < n_agents(); ++i) {
    const bool trivial = param_.kind != ParamKind::kTwoActionBox && n_actions(i) == 1;
    if (!trivial) sum += per_state * n_states_;
  }
  return std::sqrt(sum);
}

std::vector<double> project_simplex(std::span<const double> point) {
  const std::size_t m = point.size();
  std::vector<double> sorted(point.begin(), point.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) threshold = candidate;
  }
  std::vector<double> out(m);
  for (std::size_t k = 0; k < m; ++k) out[k] = std::max(point[k] - threshold, 0.0);
  return out;
}

std::vector<double> ParamSpace::project(std::span<const double> point) const {
  if (point.size() != dim()) throw std::domain_error("project: point has wrong dimension");
  std::vector<double> out(point.begin(), point.end());
  if (param_.kind == ParamKind::kTwoActionBox) {
    for (double& x : out) x = std::clamp(x, 0.0, 1.0);
    return out;
  }
  for (int i = 0; i < n_agents(); ++i) {
    const auto m = static_cast<std::size_t>(block_size(i));
    for (int s = 0; s < n_states_; ++s) {
      const std::size_t begin = index(i, s, 0);
      // A point already on the simplex is returned untouched so that
      // projection is exactly idempotent.
      double sum = 0.0;
      bool nonneg = true;
      for (std::size_t c = 0; c < m; ++c) {
        sum += out[begin + c];
        nonneg = nonneg && out[begin + c] >= 0.0;
      }
      if (nonneg && std::abs(sum - 1.0) <= 1e-15 * static_cast<double>(m)) continue;
      const auto projected = project_simplex(std::span<const double>(out).subspan(begin, m));
      std::copy(projected.begin(), projected.end(), out.begin() + static_cast<std::ptrdiff_t>(begin));
    }
  }
  return out;
}

bool ParamSpace::contains(std::span<const double> point, double tol) const {
  if (point.size() != dim()) return false;
  for (double x : point)
    if (!std::isfinite(x) || x < -tol) return false;
  if (param_.kind == ParamKind::kTwoActionBox) {
    for (double x : point)
      if (x > 1.0 + tol) return false;
    return true;
  }
  for (int i = 0; i < n_agents(); ++i) {
    for (int s = 0; s < n_states_; ++s) {
      double sum = 0.0;
      for (int c = 0; c < block_size(i); ++c) sum += point[index(i, s, c)];
      if (std::abs(sum - 1.0) > tol) return false;
    }
  }
  return true;
}

std::vector<double> ParamSpace::uniform_point() const {
  std::vector<double> out(dim());
  for (int i = 0; i < n_agents(); ++i)
    for (int s = 0; s < n_states_; ++s)
      for (int c = 0; c < block_size(i); ++c)
        out[index(i, s, c)] = param_.kind == ParamKind::kTwoActionBox ? 0.5 : 1.0 / block_size(i);
  return out;
}

void ParamSpace::set_vertex(std::span<double> theta, int agent, std::span<const int> actions) const {
  if (actions.size() != static_cast<std::size_t>(n_states_))
    throw std::domain_error("set_vertex: need one action per state");
  for (int s = 0; s < n_states_; ++s) {
    const int a = actions[static_cast<std::size_t>(s)];
    if (param_.kind == ParamKind::kTwoActionBox) {
      theta[index(agent, s, 0)] = a == 0 ? 1.0 : 0.0;
    } else {
      for (int c = 0; c < block_size(agent); ++c) theta[index(agent, s, c)] = c == a ? 1.0 : 0.0;
    }
  }
}

PolicyParams::PolicyParams(ParamSpace space, std::vector<double> theta)
    : space_(std::move(space)), theta_(std::move(theta)) {
  if (theta_.size() != space_.dim()) throw std::domain_error("policy parameters have wrong dimension");
  if (!space_.contains(theta_)) throw std::domain_error("policy parameters lie outside the feasible set");
}

PolicyParams PolicyParams::unchecked(ParamSpace space, std::vector<double> theta) {
  if (theta.size() != space.dim()) throw std::domain_error("policy parameters have wrong dimension");
  return PolicyParams(std::move(space), std::move(theta), NoCheck{});
}

PolicyParams project(std::span<const double> point, const ParamSpace& space) {
  return PolicyParams(space, space.project(point));
}

namespace {

void check_indices(const PolicyParams& params, int agent, int s, int a) {
  const auto& space = params.space();
  if (agent < 0 || agent >= space.n_agents()) throw std::out_of_range("agent index out of range");
  if (s < 0 || s >= space.n_states()) throw std::out_of_range("state index out of range");
  if (a < 0 || a >= space.n_actions(agent)) throw std::out_of_range("action index out of range");
}

double prob_unchecked(const PolicyParams& params, int agent, int s, int a) {
  const auto& space = params.space();
  const double alpha = space.alpha();
  switch (space.kind()) {
    case ParamKind::kDirect: return params[space.index(agent, s, a)];
    case ParamKind::kAlphaGreedy:
      return (1.0 - alpha) * params[space.index(agent, s, a)] + alpha / space.n_actions(agent);
    case ParamKind::kTwoActionBox: {
      const double theta = params[space.index(agent, s, 0)];
      return a == 0 ? (1.0 - alpha) * theta + alpha / 2.0
                    : (1.0 - alpha) * (1.0 - theta) + alpha / 2.0;
    }
  }
  return 0.0;
}

}  // namespace

double action_prob(const PolicyParams& params, int agent, int s, int a) {
  check_indices(params, agent, s, a);
  return prob_unchecked(params, agent, s, a);
}

std::vector<double> action_probs(const PolicyParams& params, int agent, int s) {
  check_indices(params, agent, s, 0);
  std::vector<double> out(static_cast<std::size_t>(params.space().n_actions(agent)));
  for (std::size_t a = 0; a < out.size(); ++a) out[a] = prob_unchecked(params, agent, s, static_cast<int>(a));
  return out;
}

std::vector<double> grad_theta_prob(const PolicyParams& params, int agent, int s, int a) {
  check_indices(params, agent, s, a);
  const auto& space = params.space();
  std::vector<double> grad(space.agent_dim(agent), 0.0);
  const std::size_t base = space.index(agent, s, 0) - space.agent_offset(agent);
  for (int c = 0; c < space.block_size(agent); ++c)
    grad[base + static_cast<std::size_t>(c)] = space.prob_slope(agent, a, c);
  return grad;
}

std::vector<double> grad_log_prob(const PolicyParams& params, int agent, int s, int a) {
  const double p = action_prob(params, agent, s, a);
  if (!(p > 0.0)) throw std::domain_error("grad_log_prob: action has zero probability");
  auto grad = grad_theta_prob(params, agent, s, a);
  for (double& g : grad) g /= p;
  return grad;
}

int sample_action(const PolicyParams& params, int agent, int s, Rng& rng) {
  return static_cast<int>(sample_categorical(action_probs(params, agent, s), rng));
}

double grad_log_prob_sup(const ParamSpace& space) {
  const double alpha = space.alpha();
  switch (space.kind()) {
    case ParamKind::kDirect: return std::numeric_limits<double>::infinity();
    case ParamKind::kAlphaGreedy: {
      double sup = 0.0;
      for (int i = 0; i < space.n_agents(); ++i)
        sup = std::max(sup, (1.0 - alpha) * space.n_actions(i) / alpha);
      return sup;
    }
    case ParamKind::kTwoActionBox:
      if (alpha == 0.0) return std::numeric_limits<double>::infinity();
      return (1.0 - alpha) / (alpha / 2.0);
  }
  return 0.0;
}

}  // namespace nashvi
