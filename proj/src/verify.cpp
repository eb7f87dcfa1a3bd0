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

#include "nashvi/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "nashvi/estimator.hpp"
#include "nashvi/exact_eval.hpp"
#include "nashvi/metrics.hpp"

namespace nashvi {

namespace {

// Sub-streams of the verification seed, one per suite.
enum SuiteStream : std::uint64_t {
  kGradientStream = 1,
  kInvariantStream,
  kLipschitzStream,
  kMonotoneStream,
  kCoverageStream,
  kMviStream,
  kDominationStream,
};

Rng suite_rng(const VerifyOptions& opts, SuiteStream which) {
  return substream(opts.seed, Stream::kSampling, which);
}

template <class Body>
SuiteResult timed(std::string name, Body body) {
  const auto started = std::chrono::steady_clock::now();
  SuiteResult result;
  result.name = std::move(name);
  body(result);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

double norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

std::string describe(auto&&... parts) {
  std::ostringstream msg;
  msg.precision(6);
  (msg << ... << parts);
  return msg.str();
}

}  // namespace

std::vector<double> finite_difference_gradient(const TabularGame& game, const PolicyParams& params,
                                               double step) {
  const ParamSpace& space = params.space();
  std::vector<double> grad(space.dim(), 0.0);
  std::vector<double> theta(params.theta().begin(), params.theta().end());
  for (int i = 0; i < space.n_agents(); ++i) {
    for (std::size_t c = space.agent_offset(i); c < space.agent_offset(i) + space.agent_dim(i); ++c) {
      const double saved = theta[c];
      theta[c] = saved + step;
      const double up = total_reward(game, PolicyParams::unchecked(space, theta), i);
      theta[c] = saved - step;
      const double down = total_reward(game, PolicyParams::unchecked(space, theta), i);
      theta[c] = saved;
      grad[c] = (up - down) / (2.0 * step);
    }
  }
  return grad;
}

SuiteResult check_gradient(const TabularGame& game, const ParamSpace& space, const VerifyOptions& opts) {
  return timed("gradient", [&](SuiteResult& out) {
    Rng rng = suite_rng(opts, kGradientStream);
    double worst = 0.0;
    for (const auto& theta : random_points(space, static_cast<std::size_t>(opts.gradient_points), rng)) {
      const PolicyParams params(space, theta);
      const auto field = pseudo_gradient(game, params);
      const auto fd = finite_difference_gradient(game, params, opts.fd_step);
      for (std::size_t c = 0; c < fd.size(); ++c) {
        // Coordinates with a tiny gradient are compared on an absolute floor.
        const double scale = std::max(std::abs(field[c]), 1e-4);
        worst = std::max(worst, std::abs(fd[c] + field[c]) / scale);
      }
    }
    out.passed = worst <= opts.gradient_rtol;
    out.detail = describe("max relative error ", worst, " over ", opts.gradient_points,
                          " points (limit ", opts.gradient_rtol, ")");
  });
}

SuiteResult check_invariants(const TabularGame& game, const ParamSpace& space, const VerifyOptions& opts) {
  return timed("invariants", [&](SuiteResult& out) {
    Rng rng = suite_rng(opts, kInvariantStream);
    const double gamma = game.discount();
    double worst = 0.0;
    for (const auto& theta : random_points(space, static_cast<std::size_t>(opts.invariant_points), rng)) {
      const PolicyParams params(space, theta);
      const FieldEvaluation eval = FieldEvaluation::evaluate(game, params);
      const Eigen::MatrixXd kernel = induced_kernel(game, params);
      const Eigen::MatrixXd pi = joint_policy(game, params);
      for (int i = 0; i < game.n_agents(); ++i) {
        const Eigen::VectorXd& v = eval.value[static_cast<std::size_t>(i)];
        const Eigen::VectorXd bellman = induced_reward(game, params, i) + gamma * kernel * v - v;
        worst = std::max(worst, bellman.cwiseAbs().maxCoeff());
        // V(s) = sum_a pi(a|s) Q(s, a).
        const Eigen::VectorXd averaged = (pi.cwiseProduct(eval.qvalue[static_cast<std::size_t>(i)])).rowwise().sum();
        worst = std::max(worst, (averaged - v).cwiseAbs().maxCoeff());
      }
      const Eigen::VectorXd& d = eval.occupancy;
      const Eigen::Map<const Eigen::VectorXd> rho(game.initial_dist().data(), game.n_states());
      const Eigen::VectorXd balance = (1.0 - gamma) * rho + gamma * kernel.transpose() * d - d;
      worst = std::max(worst, balance.cwiseAbs().maxCoeff());
      worst = std::max(worst, std::abs(d.sum() - 1.0));
      worst = std::max(worst, std::max(0.0, -d.minCoeff()));
    }
    out.passed = worst <= opts.invariant_tol;
    out.detail = describe("max residual ", worst, " over ", opts.invariant_points, " points (limit ",
                          opts.invariant_tol, ")");
  });
}

SuiteResult check_lipschitz(const TabularGame& game, const ParamSpace& space, const VerifyOptions& opts) {
  return timed("lipschitz", [&](SuiteResult& out) {
    Rng rng = suite_rng(opts, kLipschitzStream);
    const FieldFn field = exact_field(game, space);
    const auto points = random_points(space, 2 * static_cast<std::size_t>(opts.pairs), rng);
    double worst = 0.0;
    for (std::size_t p = 0; p + 1 < points.size(); p += 2) {
      const auto fa = field(points[p]);
      const auto fb = field(points[p + 1]);
      std::vector<double> df(fa.size()), dx(fa.size());
      for (std::size_t c = 0; c < fa.size(); ++c) {
        df[c] = fa[c] - fb[c];
        dx[c] = points[p][c] - points[p + 1][c];
      }
      const double gap = norm(dx);
      if (gap > 0.0) worst = std::max(worst, norm(df) / gap);
    }
    out.passed = worst <= opts.lipschitz;
    out.detail = describe("max ratio ", worst, " over ", opts.pairs, " pairs (L = ", opts.lipschitz, ")");
  });
}

SuiteResult check_monotonicity(const TabularGame& game, const ParamSpace& space, const VerifyOptions& opts) {
  return timed("monotonicity", [&](SuiteResult& out) {
    Rng rng = suite_rng(opts, kMonotoneStream);
    const FieldFn field = exact_field(game, space);
    const auto points = random_points(space, 2 * static_cast<std::size_t>(opts.pairs), rng);
    const double modulus = 1.0 / opts.beta - opts.lipschitz;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p + 1 < points.size(); p += 2) {
      const auto fa = field(points[p]);
      const auto fb = field(points[p + 1]);
      double inner = 0.0, sq = 0.0;
      for (std::size_t c = 0; c < fa.size(); ++c) {
        const double dx = points[p][c] - points[p + 1][c];
        // The proximal term contributes ||dx||^2 / beta whatever the centre.
        inner += (fa[c] - fb[c]) * dx + dx * dx / opts.beta;
        sq += dx * dx;
      }
      worst = std::min(worst, inner - modulus * sq);
    }
    out.passed = worst >= -opts.slack_tol;
    out.detail = describe("min slack ", worst, " over ", opts.pairs, " pairs (modulus ", modulus, ")");
  });
}

SuiteResult check_coverage(const TabularGame& game, const ParamSpace& space, const VerifyOptions& opts) {
  return timed("coverage", [&](SuiteResult& out) {
    const double score = grad_log_prob_sup(space);
    if (!std::isfinite(score)) {
      out.passed = true;
      out.detail = "skipped: unbounded score without an exploration floor";
      return;
    }
    const double bound = error_bound(opts.coverage_horizon, opts.coverage_trajectories,
                                     opts.coverage_delta, game.n_agents(), score,
                                     game.reward_bound(), game.discount());
    Rng rng = suite_rng(opts, kCoverageStream);
    int covered = 0;
    for (int r = 0; r < opts.coverage_repeats; ++r) {
      const auto theta = random_points(space, 1, rng).front();
      const PolicyParams params(space, theta);
      const auto exact = pseudo_gradient(game, params);
      const auto estimate = gpomdp_estimate(game, params, opts.coverage_horizon,
                                            opts.coverage_trajectories, rng()).field();
      double sq = 0.0;
      for (std::size_t c = 0; c < exact.size(); ++c) sq += (estimate[c] - exact[c]) * (estimate[c] - exact[c]);
      if (sq <= bound) ++covered;
    }
    const double frequency = static_cast<double>(covered) / opts.coverage_repeats;
    const double required = 1.0 - opts.coverage_delta / (4.0 * opts.coverage_trajectories);
    out.passed = frequency >= required;
    out.detail = describe("coverage ", frequency, " (need ", required, ", bound M = ", bound, ")");
  });
}

std::size_t grid_size(const ParamSpace& space, int per_axis) {
  double total = 1.0;
  for (int i = 0; i < space.n_agents(); ++i) {
    double block = per_axis;
    if (space.kind() != ParamKind::kTwoActionBox) {
      // Compositions of per_axis - 1 into n_actions parts.
      const int m = space.n_actions(i);
      block = 1.0;
      for (int j = 1; j < m; ++j) block = block * (per_axis - 1 + j) / j;
    }
    total *= std::pow(block, space.n_states());
  }
  return total > 1e18 ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(std::llround(total));
}

SuiteResult check_mvi(const TabularGame& game, const ParamSpace& space, const VerifyOptions& opts) {
  return timed("mvi", [&](SuiteResult& out) {
    const auto equilibrium = enumerate_pure_equilibrium(game, space);
    if (!equilibrium) {
      out.passed = false;
      out.detail = "no pure equilibrium found to test";
      return;
    }
    std::vector<std::vector<double>> points;
    std::string grid_note;
    if (grid_size(space, opts.grid_per_axis) <= opts.max_grid_points) {
      points = parameter_grid(space, opts.grid_per_axis);
      grid_note = describe(points.size(), " grid + ");
    } else {
      grid_note = "grid too large, ";
    }
    Rng rng = suite_rng(opts, kMviStream);
    for (auto& p : random_points(space, static_cast<std::size_t>(opts.mvi_random_points), rng))
      points.push_back(std::move(p));
    const MviResidual residual = mvi_residual(game, *equilibrium, points);
    out.passed = residual.residual >= -opts.slack_tol;
    std::ostringstream vertex;
    for (double x : equilibrium->theta()) vertex << (vertex.tellp() > 0 ? "," : "") << x;
    out.detail = describe("min residual ", residual.residual, " at equilibrium (", vertex.str(), ") over ",
                          grid_note, opts.mvi_random_points, " random points");
  });
}

SuiteResult check_domination(const TabularGame& game, const ParamSpace& space, const VerifyOptions& opts) {
  return timed("domination", [&](SuiteResult& out) {
    Rng rng = suite_rng(opts, kDominationStream);
    double worst = std::numeric_limits<double>::infinity();
    int failures = 0;
    for (const auto& theta : random_points(space, static_cast<std::size_t>(opts.domination_points), rng)) {
      const DominationCheck check = gradient_domination_check(game, PolicyParams(space, theta), opts.m1, opts.slack_tol);
      worst = std::min(worst, check.worst_slack);
      if (!check.holds) ++failures;
    }
    out.passed = failures == 0;
    out.detail = describe("min slack ", worst, ", ", failures, " of ", opts.domination_points,
                          " points violate (M1 = ", opts.m1, ")");
  });
}

std::vector<SuiteResult> run_verify(const TabularGame& game, const ParamSpace& space,
                                    const VerifyOptions& opts) {
  return {check_gradient(game, space, opts),     check_invariants(game, space, opts),
          check_lipschitz(game, space, opts),    check_monotonicity(game, space, opts),
          check_coverage(game, space, opts),     check_mvi(game, space, opts),
          check_domination(game, space, opts)};
}

}  // namespace nashvi
