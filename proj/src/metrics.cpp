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

#include "nashvi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <exception>
#include <numeric>
#include <stdexcept>

#include "nashvi/exact_eval.hpp"
#include "nashvi/parallel.hpp"

namespace nashvi {

namespace {

// Exploration mass spread uniformly on top of a deterministic rule.
double smoothing(const ParamSpace& space) {
  return space.kind() == ParamKind::kDirect ? 0.0 : space.alpha();
}

class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) compensation_ += (sum_ - t) + x;
    else compensation_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace

BestResponse best_response(const TabularGame& game, const PolicyParams& params, int agent) {
  const ParamSpace& space = params.space();
  const int n = game.n_states();
  const int m = game.n_actions(agent);
  const double gamma = game.discount();
  const double eps = smoothing(space);
  const Eigen::MatrixXd others = opponent_policy(game, params, agent);

  // Agent-level MDP against the fixed opponents.
  std::vector<Eigen::MatrixXd> kernel(static_cast<std::size_t>(m), Eigen::MatrixXd::Zero(n, n));
  Eigen::MatrixXd reward = Eigen::MatrixXd::Zero(n, m);
  for (int s = 0; s < n; ++s) {
    for (int joint = 0; joint < game.n_joint(); ++joint) {
      const double w = others(s, joint);
      if (w == 0.0) continue;
      const int a = game.agent_action(joint, agent);
      reward(s, a) += w * game.reward(agent, s, joint);
      const auto row = game.transition_row(s, joint);
      for (int next = 0; next < n; ++next)
        kernel[static_cast<std::size_t>(a)](s, next) += w * row[static_cast<std::size_t>(next)];
    }
  }

  BestResponse br;
  br.rule.assign(static_cast<std::size_t>(n), 0);
  constexpr int kMaxSweeps = 1000;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    ++br.iterations;
    Eigen::MatrixXd p_rule = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd r_rule = Eigen::VectorXd::Zero(n);
    for (int s = 0; s < n; ++s) {
      for (int a = 0; a < m; ++a) {
        const double prob = (a == br.rule[static_cast<std::size_t>(s)] ? 1.0 - eps : 0.0) + eps / m;
        if (prob == 0.0) continue;
        p_rule.row(s) += prob * kernel[static_cast<std::size_t>(a)].row(s);
        r_rule(s) += prob * reward(s, a);
      }
    }
    const Eigen::VectorXd v =
        (Eigen::MatrixXd::Identity(n, n) - gamma * p_rule).partialPivLu().solve(r_rule);

    bool changed = false;
    for (int s = 0; s < n; ++s) {
      std::vector<double> q(static_cast<std::size_t>(m));
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < m; ++a) {
        q[static_cast<std::size_t>(a)] = reward(s, a) + gamma * kernel[static_cast<std::size_t>(a)].row(s).dot(v);
        best = std::max(best, q[static_cast<std::size_t>(a)]);
      }
      const double tol = 1e-12 * (1.0 + std::abs(best));
      int choice = 0;
      while (q[static_cast<std::size_t>(choice)] < best - tol) ++choice;
      if (choice != br.rule[static_cast<std::size_t>(s)]) {
        br.rule[static_cast<std::size_t>(s)] = choice;
        changed = true;
      }
    }
    if (!changed) break;
  }

  std::vector<double> theta(params.theta().begin(), params.theta().end());
  space.set_vertex(theta, agent, br.rule);
  br.value = total_reward(game, PolicyParams(space, std::move(theta)), agent);
  return br;
}

NashGap nash_gap(const TabularGame& game, const PolicyParams& params) {
  NashGap gap;
  gap.sup = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < game.n_agents(); ++i) {
    const double j = total_reward(game, params, i);
    const double br = best_response(game, params, i).value;
    gap.best_response.push_back(br);
    gap.total_reward.push_back(j);
    gap.per_agent.push_back(br - j);
    gap.sup = std::max(gap.sup, br - j);
  }
  return gap;
}

std::vector<double> weighted_gap(std::span<const double> gaps, double exponent) {
  if (gaps.empty()) throw std::invalid_argument("weighted_gap: empty gap sequence");
  std::vector<double> eps;
  eps.reserve(gaps.size());
  CompensatedSum numerator;
  CompensatedSum denominator;
  for (std::size_t k = 0; k < gaps.size(); ++k) {
    const double w = std::pow(static_cast<double>(k + 1), exponent);
    numerator.add(w * gaps[k]);
    denominator.add(w);
    eps.push_back(numerator.value() / denominator.value());
  }
  return eps;
}

GapReport gap_report(const TabularGame& game, const ParamSpace& space,
                     std::span<const std::vector<double>> iterates, double exponent) {
  if (iterates.empty()) throw std::invalid_argument("gap_report: no iterates");
  GapReport report;
  report.n_agents = game.n_agents();
  report.exponent = exponent;
  const auto count = static_cast<long>(iterates.size());
  std::vector<NashGap> gaps(iterates.size());

  // Exceptions may not cross the parallel region; keep the first and rethrow.
  std::exception_ptr failure;
  const int threads = parallel::effective_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
  for (long k = 0; k < count; ++k) {
    try {
      gaps[static_cast<std::size_t>(k)] = nash_gap(game, PolicyParams(space, iterates[static_cast<std::size_t>(k)]));
    } catch (...) {
#pragma omp critical(nashvi_gap_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  for (const auto& g : gaps) {
    report.gaps.push_back(g.per_agent);
    report.sup_gap.push_back(g.sup);
  }
  report.eps.assign(iterates.size(), -std::numeric_limits<double>::infinity());
  for (int i = 0; i < game.n_agents(); ++i) {
    std::vector<double> series;
    series.reserve(iterates.size());
    for (const auto& g : gaps) series.push_back(g.per_agent[static_cast<std::size_t>(i)]);
    const auto agent_eps = weighted_gap(series, exponent);
    for (std::size_t k = 0; k < agent_eps.size(); ++k) report.eps[k] = std::max(report.eps[k], agent_eps[k]);
  }
  return report;
}

double linear_max_agent(const ParamSpace& space, int agent, std::span<const double> g) {
  if (g.size() != space.agent_dim(agent)) throw std::invalid_argument("linear_max_agent: dimension mismatch");
  double total = 0.0;
  const int block = space.block_size(agent);
  for (int s = 0; s < space.n_states(); ++s) {
    const auto part = g.subspan(static_cast<std::size_t>(s * block), static_cast<std::size_t>(block));
    if (space.kind() == ParamKind::kTwoActionBox) total += std::max(0.0, part[0]);
    else total += *std::max_element(part.begin(), part.end());
  }
  return total;
}

double linear_max(const ParamSpace& space, std::span<const double> g) {
  if (g.size() != space.dim()) throw std::invalid_argument("linear_max: dimension mismatch");
  double total = 0.0;
  for (int i = 0; i < space.n_agents(); ++i)
    total += linear_max_agent(space, i, g.subspan(space.agent_offset(i), space.agent_dim(i)));
  return total;
}

double svi_prime_gap(const TabularGame& game, const PolicyParams& params) {
  const std::vector<double> field = pseudo_gradient(game, params);
  std::vector<double> negated(field.size());
  double inner = 0.0;
  for (std::size_t k = 0; k < field.size(); ++k) {
    inner += field[k] * params[k];
    negated[k] = -field[k];
  }
  return inner + linear_max(params.space(), negated);
}

MviResidual mvi_residual(const TabularGame& game, const PolicyParams& candidate,
                         std::span<const std::vector<double>> points) {
  MviResidual result;
  result.residual = std::numeric_limits<double>::infinity();
  const ParamSpace& space = candidate.space();
  for (const auto& point : points) {
    const PolicyParams params(space, point);
    const auto field = FieldEvaluation::evaluate(game, params).field;
    double ip = 0.0;
    for (std::size_t k = 0; k < field.size(); ++k) ip += field[k] * (point[k] - candidate[k]);
    if (ip < result.residual) {
      result.residual = ip;
      result.worst_point = point;
    }
  }
  result.points = points.size();
  if (points.empty()) result.residual = 0.0;
  return result;
}

namespace {

// Every point of the simplex with coordinates in {0, 1/d, ..., 1}.
void simplex_lattice(int size, int denominator, std::vector<int>& current,
                     std::vector<std::vector<double>>& out) {
  const int used = std::accumulate(current.begin(), current.end(), 0);
  if (static_cast<int>(current.size()) == size - 1) {
    std::vector<double> point;
    for (int c : current) point.push_back(static_cast<double>(c) / denominator);
    point.push_back(static_cast<double>(denominator - used) / denominator);
    out.push_back(std::move(point));
    return;
  }
  for (int c = 0; c <= denominator - used; ++c) {
    current.push_back(c);
    simplex_lattice(size, denominator, current, out);
    current.pop_back();
  }
}

}  // namespace

std::vector<std::vector<double>> parameter_grid(const ParamSpace& space, int per_axis) {
  if (per_axis < 2) throw std::invalid_argument("parameter_grid: need at least two points per axis");
  std::vector<std::vector<std::vector<double>>> options;  // per block
  for (int i = 0; i < space.n_agents(); ++i) {
    std::vector<std::vector<double>> block;
    if (space.kind() == ParamKind::kTwoActionBox) {
      for (int j = 0; j < per_axis; ++j) block.push_back({static_cast<double>(j) / (per_axis - 1)});
    } else {
      std::vector<int> current;
      simplex_lattice(space.block_size(i), per_axis - 1, current, block);
    }
    for (int s = 0; s < space.n_states(); ++s) options.push_back(block);
  }

  std::vector<std::vector<double>> grid{{}};
  for (const auto& block : options) {
    std::vector<std::vector<double>> next;
    next.reserve(grid.size() * block.size());
    for (const auto& prefix : grid)
      for (const auto& choice : block) {
        auto point = prefix;
        point.insert(point.end(), choice.begin(), choice.end());
        next.push_back(std::move(point));
      }
    grid = std::move(next);
  }
  return grid;
}

std::vector<std::vector<double>> random_points(const ParamSpace& space, std::size_t count, Rng& rng) {
  std::vector<std::vector<double>> points;
  points.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    std::vector<double> point(space.dim());
    if (space.kind() == ParamKind::kTwoActionBox) {
      for (double& x : point) x = rng.uniform();
    } else {
      for (int i = 0; i < space.n_agents(); ++i)
        for (int s = 0; s < space.n_states(); ++s) {
          double sum = 0.0;
          for (int c = 0; c < space.block_size(i); ++c) {
            const double e = -std::log1p(-rng.uniform());
            point[space.index(i, s, c)] = e;
            sum += e;
          }
          for (int c = 0; c < space.block_size(i); ++c) point[space.index(i, s, c)] /= sum;
        }
    }
    points.push_back(std::move(point));
  }
  return points;
}

DominationCheck gradient_domination_check(const TabularGame& game, const PolicyParams& params,
                                          double m1, double tolerance) {
  if (!(m1 > 0.0)) throw std::invalid_argument("gradient_domination_check: M1 must be positive");
  const ParamSpace& space = params.space();
  const auto field = pseudo_gradient(game, params);
  const NashGap gap = nash_gap(game, params);
  DominationCheck check;
  check.worst_slack = std::numeric_limits<double>::infinity();
  for (int i = 0; i < game.n_agents(); ++i) {
    const std::size_t begin = space.agent_offset(i);
    const std::size_t dim = space.agent_dim(i);
    std::vector<double> negated(dim);
    double inner = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      inner += field[begin + k] * params[begin + k];
      negated[k] = -field[begin + k];
    }
    const double linearized = inner + linear_max_agent(space, i, negated);
    const double slack = m1 * linearized - gap.per_agent[static_cast<std::size_t>(i)];
    if (slack < check.worst_slack) {
      check.worst_slack = slack;
      check.worst_agent = i;
    }
  }
  check.holds = check.worst_slack >= -tolerance;
  return check;
}

std::optional<PolicyParams> enumerate_pure_equilibrium(const TabularGame& game,
                                                       const ParamSpace& space, double tolerance) {
  const int n = game.n_states();
  std::vector<std::vector<int>> rules(static_cast<std::size_t>(game.n_agents()),
                                      std::vector<int>(static_cast<std::size_t>(n), 0));
  // Odometer over the concatenated per-agent rules.
  while (true) {
    std::vector<double> theta(space.dim(), 0.0);
    for (int i = 0; i < game.n_agents(); ++i) space.set_vertex(theta, i, rules[static_cast<std::size_t>(i)]);
    PolicyParams params(space, std::move(theta));
    if (nash_gap(game, params).sup <= tolerance) return params;

    bool advanced = false;
    for (int i = 0; i < game.n_agents() && !advanced; ++i) {
      for (int s = 0; s < n && !advanced; ++s) {
        int& a = rules[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)];
        if (++a < game.n_actions(i)) advanced = true;
        else a = 0;
      }
    }
    if (!advanced) return std::nullopt;
  }
}

}  // namespace nashvi
