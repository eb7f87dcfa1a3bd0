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

#include "nashvi/vi_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nashvi/estimator.hpp"

namespace nashvi {

double SolverConfig::stoch_l1() const {
  if (stoch_l1_override > 0.0) return stoch_l1_override;
  return std::min(1.0 / (2.0 * std::sqrt(stoch_l2)), 1.0 / (4.0 * stoch_l2));
}

double SolverConfig::stoch_eta(int h) const {
  return stoch_l1() / std::pow(static_cast<double>(h), 2.0 / 3.0);
}

int SolverConfig::inner_steps(int k) const {
  return std::max(1, static_cast<int>(std::ceil(inner_scale * k - 1e-12)));
}

SolverConfig SolverConfig::defaults(SolverMode mode, double lipschitz) {
  SolverConfig cfg;
  cfg.mode = mode;
  cfg.lipschitz = lipschitz;
  cfg.beta = 0.5 / lipschitz;
  cfg.exact_eta = 0.9 * step_window(lipschitz, cfg.beta).contraction_upper();
  cfg.stoch_l2 = std::max(cfg.modulus(), 6.0 * cfg.regularized_lipschitz_sq());
  if (mode == SolverMode::kExact) {
    cfg.weight_exponent = 0.5;
    cfg.outer_iterations = 300;
  } else {
    cfg.weight_exponent = 0.25;
    cfg.outer_iterations = 200;
  }
  return cfg;
}

double StepWindow::upper() const { return std::min({inverse_modulus, second, third}); }

double StepWindow::contraction_upper() const {
  return std::min({upper(), contraction_second, contraction_third});
}

StepWindow step_window(double lipschitz, double beta) {
  const double mu = 1.0 / beta - lipschitz;
  const double lk2 = lipschitz * lipschitz + 1.0 / (beta * beta);
  StepWindow w{};
  w.inverse_modulus = 1.0 / mu;
  w.second = (-mu + std::sqrt(mu * mu + 32.0 * lk2)) / 16.0;
  w.third = (-mu + std::sqrt(mu * mu + 8.0 * lk2)) / 32.0;
  w.contraction_second = (-mu + std::sqrt(mu * mu + 32.0 * lk2)) / (16.0 * lk2);
  w.contraction_third = (-mu + std::sqrt(mu * mu + 8.0 * lk2)) / (8.0 * lk2);
  return w;
}

ValidationReport validate_config(const SolverConfig& cfg) {
  ValidationReport report;
  auto fail = [&report](auto&&... parts) {
    std::ostringstream msg;
    (msg << ... << parts);
    report.fail(msg.str());
  };

  if (!(cfg.lipschitz > 0.0) || !std::isfinite(cfg.lipschitz)) fail("L must be positive, got ", cfg.lipschitz);
  if (!(cfg.beta > 0.0 && cfg.beta * cfg.lipschitz < 1.0))
    fail("beta out of range: need 0 < beta < 1/L = ", 1.0 / cfg.lipschitz, ", got ", cfg.beta);
  if (cfg.outer_iterations < 1) fail("K must be at least 1");
  if (!(cfg.inner_scale > 0.0)) fail("inner schedule scale must be positive");
  if (!(cfg.weight_exponent > 0.0)) fail("weight exponent must be positive");
  if (!report.ok()) return report;

  long long total_inner = 0;
  for (int k = 1; k <= cfg.outer_iterations; ++k) total_inner += cfg.inner_steps(k);
  if (total_inner > cfg.max_total_inner)
    fail("inner schedule needs ", total_inner, " iterations, above the cap ", cfg.max_total_inner);

  if (cfg.mode == SolverMode::kExact) {
    const StepWindow window = step_window(cfg.lipschitz, cfg.beta);
    if (!(cfg.exact_eta > 0.0 && cfg.exact_eta < window.upper()))
      fail("eta out of range: need 0 < eta < ", window.upper(), ", got ", cfg.exact_eta);
    else if (cfg.exact_eta >= window.contraction_upper()) {
      std::ostringstream msg;
      msg << "eta = " << cfg.exact_eta << " is inside the step window but above "
          << window.contraction_upper()
          << ", where the inner contraction estimate no longer applies";
      report.warn(msg.str());
    }
  } else {
    const double lower = std::max(cfg.modulus(), 6.0 * cfg.regularized_lipschitz_sq());
    if (!(cfg.stoch_l2 >= lower * (1.0 - 1e-12)))
      fail("l2 below its lower limit ", lower, ": got ", cfg.stoch_l2);
    const double derived = std::min(1.0 / (2.0 * std::sqrt(cfg.stoch_l2)), 1.0 / (4.0 * cfg.stoch_l2));
    if (cfg.stoch_l1_override < 0.0 || cfg.stoch_l1_override > derived * (1.0 + 1e-12))
      fail("eta out of range: need 0 < l1 <= ", derived, ", got ", cfg.stoch_l1_override);
    if (cfg.horizon < 0) fail("horizon T must be nonnegative");
    if (cfg.trajectories.kind == TrajectoryRule::Kind::kFixed && cfg.trajectories.fixed < 1)
      fail("K1 must be at least 1");
  }
  return report;
}

std::vector<double> prox_step(std::span<const double> z, std::span<const double> g, double eta,
                              const ParamSpace& space) {
  if (z.size() != g.size()) throw std::invalid_argument("prox_step: dimension mismatch");
  std::vector<double> point(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) point[k] = z[k] - eta * g[k];
  return space.project(point);
}

namespace {

double distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(sum);
}

}  // namespace

InnerResult inner_loop(const FieldFn& field_k, std::span<const double> start, int steps,
                       const std::function<double(int)>& step_size, const ParamSpace& space,
                       bool reuse_field, const InnerObserver& observer) {
  InnerResult result;
  result.theta.assign(start.begin(), start.end());
  result.z.assign(start.begin(), start.end());
  std::vector<double> cached;
  for (int h = 1; h <= steps; ++h) {
    const double eta = step_size(h);
    if (!reuse_field || cached.empty()) {
      cached = field_k(result.theta);
      ++result.diagnostics.field_evaluations;
    }
    std::vector<double> next_theta = prox_step(result.z, cached, eta, space);
    std::vector<double> next_field = field_k(next_theta);
    ++result.diagnostics.field_evaluations;
    std::vector<double> next_z = prox_step(result.z, next_field, eta, space);

    result.diagnostics.last_step_norm = distance(next_theta, result.theta);
    if (observer) observer(h, next_theta, result.theta, next_z);
    result.theta = std::move(next_theta);
    result.z = std::move(next_z);
    if (reuse_field) cached = std::move(next_field);
    else cached.clear();
  }
  result.diagnostics.steps = steps;
  return result;
}

std::vector<double> outer_step(const FieldFn& field_k, std::span<const double> z_final,
                               double eta_tilde, const ParamSpace& space) {
  return prox_step(z_final, field_k(z_final), eta_tilde, space);
}

std::vector<double> outer_weights(int outer_iterations, double exponent) {
  std::vector<double> weights(static_cast<std::size_t>(std::max(outer_iterations, 0)));
  for (std::size_t k = 0; k < weights.size(); ++k)
    weights[k] = std::pow(static_cast<double>(k + 1), exponent);
  return weights;
}

int sample_tau(std::span<const double> weights, Rng& rng) {
  if (weights.empty()) throw std::domain_error("sample_tau: no weights");
  for (double w : weights)
    if (!(w > 0.0) || !std::isfinite(w)) throw std::domain_error("sample_tau: weights must be positive");
  return static_cast<int>(sample_categorical(weights, rng)) + 1;
}

namespace {

void check_run(const TabularGame& game, const ParamSpace& space, const SolverConfig& cfg,
               SolverMode expected) {
  if (cfg.mode != expected) throw std::invalid_argument("solver configuration has the wrong mode");
  const ValidationReport report = validate_config(cfg);
  if (!report.ok()) throw std::invalid_argument("invalid solver configuration:\n" + report.summary());
  if (space.n_states() != game.n_states() || space.n_agents() != game.n_agents())
    throw std::invalid_argument("parameter space does not match the game");
  if (!cfg.initial_theta.empty() && !space.contains(cfg.initial_theta))
    throw std::invalid_argument("initial theta lies outside the feasible set");
}

// Shared outer loop. `make_field` builds the (possibly stochastic) base field
// for outer iteration k.
template <class MakeField>
RunRecord run_two_loop(const ParamSpace& space, const SolverConfig& cfg,
                       const std::function<double(int)>& step_size, bool reuse_field,
                       MakeField make_field) {
  const auto started = std::chrono::steady_clock::now();
  RunRecord record;
  record.seed = cfg.seed;
  record.thetas.reserve(static_cast<std::size_t>(cfg.outer_iterations) + 1);
  record.thetas.push_back(cfg.initial_theta.empty() ? space.uniform_point() : cfg.initial_theta);

  for (int k = 1; k <= cfg.outer_iterations; ++k) {
    const std::vector<double> center = record.thetas.back();
    const RegularizedField field_k(make_field(k), cfg.beta, center);
    const FieldFn call = [&field_k](std::span<const double> theta) { return field_k(theta); };

    InnerResult inner = inner_loop(call, center, cfg.inner_steps(k), step_size, space, reuse_field);
    record.thetas.push_back(outer_step(call, inner.z, cfg.eta_tilde(), space));
    inner.diagnostics.field_evaluations += 1;
    record.field_evaluations += inner.diagnostics.field_evaluations;
    record.inner.push_back(inner.diagnostics);
  }

  record.weights = outer_weights(cfg.outer_iterations, cfg.weight_exponent);
  Rng tau_rng = substream(cfg.seed, Stream::kTau, 0);
  record.tau = sample_tau(record.weights, tau_rng);
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return record;
}

}  // namespace

RunRecord run_algorithm1(const TabularGame& game, const ParamSpace& space, const SolverConfig& cfg) {
  check_run(game, space, cfg, SolverMode::kExact);
  const FieldFn exact = exact_field(game, space);
  const double eta = cfg.exact_eta;
  return run_two_loop(space, cfg, [eta](int) { return eta; }, true,
                      [&exact](int) { return exact; });
}

RunRecord run_algorithm2(const TabularGame& game, const ParamSpace& space, const SolverConfig& cfg) {
  check_run(game, space, cfg, SolverMode::kStochastic);
  if (space.kind() == ParamKind::kDirect)
    throw std::invalid_argument("stochastic mode needs an exploration floor (alpha > 0)");
  if (space.kind() == ParamKind::kTwoActionBox && space.alpha() == 0.0)
    throw std::invalid_argument("stochastic mode needs an exploration floor (alpha > 0)");

  long long calls = 0;
  std::uint64_t last_seed = 0;
  int last_count = 0;
  std::vector<double> last_point;
  const auto make_field = [&](int k) -> FieldFn {
    const int count = cfg.trajectories.at(k);
    return [&, count](std::span<const double> theta) {
      const std::uint64_t seed = estimator_call_seed(cfg.seed, static_cast<std::uint64_t>(calls++));
      const PolicyParams params(space, std::vector<double>(theta.begin(), theta.end()));
      last_seed = seed;
      last_count = count;
      last_point.assign(theta.begin(), theta.end());
      return gpomdp_estimate(game, params, cfg.horizon, count, seed).field();
    };
  };
  const SolverConfig& c = cfg;
  RunRecord record = run_two_loop(space, cfg, [&c](int h) { return c.stoch_eta(h); }, false, make_field);
  record.estimator_calls = calls;
  record.last_estimator_seed = last_seed;
  record.last_estimator_trajectories = last_count;
  record.last_estimator_point = std::move(last_point);
  return record;
}

}  // namespace nashvi
