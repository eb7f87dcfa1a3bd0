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

// Independent reference computations used by the tests. None of these share
// code paths with the library routines they check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "nashvi/config_io.hpp"
#include "nashvi/game.hpp"
#include "nashvi/policy.hpp"

namespace oracle {

using nashvi::ParamSpace;
using nashvi::PolicyParams;
using nashvi::TabularGame;

inline std::string config(const char* name) { return std::string(NASHVI_CONFIG_DIR) + "/" + name; }

inline nashvi::GameDocument bundled(const char* name) { return nashvi::load_game(config(name)); }

inline ParamSpace space_of(const nashvi::GameDocument& doc) {
  return ParamSpace(doc.parameterization, doc.game.n_states(),
                    {doc.game.action_counts().begin(), doc.game.action_counts().end()});
}

/// Upper-tail p-value of Pearson's statistic for `counts` against `probs`.
inline double chi_square_p(std::span<const long> counts, std::span<const double> probs) {
  long total = 0;
  for (long c : counts) total += c;
  double stat = 0.0;
  int cells = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (probs[k] <= 0.0) {
      if (counts[k] > 0) return 0.0;
      continue;
    }
    const double expected = probs[k] * static_cast<double>(total);
    stat += (counts[k] - expected) * (counts[k] - expected) / expected;
    ++cells;
  }
  if (cells < 2) return 1.0;
  boost::math::chi_squared dist(cells - 1);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

/// Probability of agent i's action a in state s, written out from the
/// parameterization definitions.
inline double prob(const PolicyParams& params, int i, int s, int a) {
  const ParamSpace& sp = params.space();
  const double alpha = sp.alpha();
  switch (sp.kind()) {
    case nashvi::ParamKind::kDirect: return params[sp.index(i, s, a)];
    case nashvi::ParamKind::kAlphaGreedy:
      return (1 - alpha) * params[sp.index(i, s, a)] + alpha / sp.n_actions(i);
    case nashvi::ParamKind::kTwoActionBox: {
      const double t = params[sp.index(i, s, 0)];
      return a == 0 ? (1 - alpha) * t + alpha / 2 : (1 - alpha) * (1 - t) + alpha / 2;
    }
  }
  return 0.0;
}

inline double joint_prob(const TabularGame& game, const PolicyParams& params, int s, int joint) {
  double p = 1.0;
  for (int i = 0; i < game.n_agents(); ++i) p *= prob(params, i, s, game.agent_action(joint, i));
  return p;
}

/// Sum_{t<=T} gamma^t E[r_i(s_t, a_t)] by walking every trajectory of length
/// T + 1 explicitly.
inline double truncated_total_reward(const TabularGame& game, const PolicyParams& params, int agent,
                                     int horizon) {
  const double gamma = game.discount();
  std::function<double(int, int, double)> walk = [&](int t, int s, double weight) -> double {
    double sum = 0.0;
    for (int a = 0; a < game.n_joint(); ++a) {
      const double w = weight * joint_prob(game, params, s, a);
      if (w == 0.0) continue;
      sum += w * std::pow(gamma, t) * game.reward(agent, s, a);
      if (t < horizon)
        for (int next = 0; next < game.n_states(); ++next)
          if (game.transition(s, a, next) > 0.0) sum += walk(t + 1, next, w * game.transition(s, a, next));
    }
    return sum;
  };
  double total = 0.0;
  for (int s = 0; s < game.n_states(); ++s)
    if (game.initial_dist()[static_cast<std::size_t>(s)] > 0.0)
      total += walk(0, s, game.initial_dist()[static_cast<std::size_t>(s)]);
  return total;
}

/// -grad of the truncated objective by central differences: F(theta, T).
inline std::vector<double> truncated_field(const TabularGame& game, const ParamSpace& space,
                                           std::span<const double> theta, int horizon, double h = 1e-5) {
  std::vector<double> x(theta.begin(), theta.end());
  std::vector<double> field(space.dim());
  for (int i = 0; i < space.n_agents(); ++i)
    for (std::size_t c = space.agent_offset(i); c < space.agent_offset(i) + space.agent_dim(i); ++c) {
      const double saved = x[c];
      x[c] = saved + h;
      const double up = truncated_total_reward(game, PolicyParams::unchecked(space, x), i, horizon);
      x[c] = saved - h;
      const double down = truncated_total_reward(game, PolicyParams::unchecked(space, x), i, horizon);
      x[c] = saved;
      field[c] = -(up - down) / (2 * h);
    }
  return field;
}

/// P^pi as nested vectors.
inline std::vector<std::vector<double>> kernel(const TabularGame& game, const PolicyParams& params) {
  const int n = game.n_states();
  std::vector<std::vector<double>> p(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n)));
  for (int s = 0; s < n; ++s)
    for (int a = 0; a < game.n_joint(); ++a)
      for (int t = 0; t < n; ++t)
        p[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)] += joint_prob(game, params, s, a) * game.transition(s, a, t);
  return p;
}

/// (1 - gamma) sum_{l<=terms} gamma^l rho^T (P^pi)^l.
inline std::vector<double> occupancy_series(const TabularGame& game, const PolicyParams& params, int terms) {
  const auto p = kernel(game, params);
  const auto n = static_cast<std::size_t>(game.n_states());
  std::vector<double> row(game.initial_dist().begin(), game.initial_dist().end());
  std::vector<double> d(n, 0.0);
  double g = 1.0;
  for (int l = 0; l <= terms; ++l) {
    for (std::size_t s = 0; s < n; ++s) d[s] += (1 - game.discount()) * g * row[s];
    std::vector<double> next(n, 0.0);
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t t = 0; t < n; ++t) next[t] += row[s] * p[s][t];
    row = next;
    g *= game.discount();
  }
  return d;
}

/// V_i = sum_{l<=terms} gamma^l (P^pi)^l r_i^pi.
inline std::vector<double> value_series(const TabularGame& game, const PolicyParams& params, int agent,
                                        int terms) {
  const auto p = kernel(game, params);
  const auto n = static_cast<std::size_t>(game.n_states());
  std::vector<double> r(n, 0.0);
  for (std::size_t s = 0; s < n; ++s)
    for (int a = 0; a < game.n_joint(); ++a)
      r[s] += joint_prob(game, params, static_cast<int>(s), a) * game.reward(agent, static_cast<int>(s), a);
  std::vector<double> v(n, 0.0), term = r;
  double g = 1.0;
  for (int l = 0; l <= terms; ++l) {
    for (std::size_t s = 0; s < n; ++s) v[s] += g * term[s];
    std::vector<double> next(n, 0.0);
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t t = 0; t < n; ++t) next[s] += p[s][t] * term[t];
    term = next;
    g *= game.discount();
  }
  return v;
}

/// Euclidean projection onto the simplex by enumerating supports: on each
/// support the KKT system has a closed form, and the nearest feasible
/// candidate is the projection.
inline std::vector<double> simplex_projection_qp(std::span<const double> p) {
  const std::size_t m = p.size();
  std::vector<double> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << m); ++mask) {
    double sum = 0.0;
    int size = 0;
    for (std::size_t k = 0; k < m; ++k)
      if (mask & (1u << k)) {
        sum += p[k];
        ++size;
      }
    const double shift = (sum - 1.0) / size;
    std::vector<double> x(m, 0.0);
    bool feasible = true;
    for (std::size_t k = 0; k < m; ++k)
      if (mask & (1u << k)) {
        x[k] = p[k] - shift;
        if (x[k] < -1e-15) feasible = false;
      }
    if (!feasible) continue;
    double dist = 0.0;
    for (std::size_t k = 0; k < m; ++k) dist += (x[k] - p[k]) * (x[k] - p[k]);
    if (dist < best_dist) {
      best_dist = dist;
      best = x;
    }
  }
  return best;
}

/// Projection onto the whole parameter set via the per-block oracle.
inline std::vector<double> projection_qp(const ParamSpace& space, std::span<const double> point) {
  std::vector<double> out(point.begin(), point.end());
  if (space.kind() == nashvi::ParamKind::kTwoActionBox) {
    for (double& x : out) x = std::min(1.0, std::max(0.0, x));
    return out;
  }
  for (int i = 0; i < space.n_agents(); ++i)
    for (int s = 0; s < space.n_states(); ++s) {
      const std::size_t b = space.index(i, s, 0);
      const auto block = simplex_projection_qp(std::span<const double>(out).subspan(b, space.block_size(i)));
      std::copy(block.begin(), block.end(), out.begin() + static_cast<std::ptrdiff_t>(b));
    }
  return out;
}

/// sup over agent i's deterministic rules (as vertices) of J_i, enumerating
/// all |A_i|^|S| rules.
inline double brute_best_response(const TabularGame& game, const PolicyParams& params, int agent) {
  const ParamSpace& space = params.space();
  const int n = game.n_states();
  const int m = game.n_actions(agent);
  std::vector<int> rule(static_cast<std::size_t>(n), 0);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<double> theta(params.theta().begin(), params.theta().end());
    space.set_vertex(theta, agent, rule);
    const PolicyParams candidate(space, theta);
    const auto v = value_series(game, candidate, agent, 3000);
    double j = 0.0;
    for (int s = 0; s < n; ++s) j += game.initial_dist()[static_cast<std::size_t>(s)] * v[static_cast<std::size_t>(s)];
    best = std::max(best, j);
    int pos = 0;
    while (pos < n && ++rule[static_cast<std::size_t>(pos)] == m) rule[static_cast<std::size_t>(pos++)] = 0;
    if (pos == n) break;
  }
  return best;
}

}  // namespace oracle
