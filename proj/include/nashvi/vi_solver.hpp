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

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nashvi/exact_eval.hpp"
#include "nashvi/game.hpp"
#include "nashvi/policy.hpp"
#include "nashvi/rng.hpp"

namespace nashvi {

enum class SolverMode { kExact, kStochastic };

/// Trajectory count per estimator call.
struct TrajectoryRule {
  enum class Kind { kFixed, kOuterPlusOne } kind = Kind::kOuterPlusOne;
  int fixed = 100;

  int at(int outer) const { return kind == Kind::kFixed ? fixed : outer + 1; }
};

struct SolverConfig {
  SolverMode mode = SolverMode::kExact;
  double lipschitz = 5.63;
  double beta = 0.5 / 5.63;
  int outer_iterations = 300;
  /// H_k = max(1, ceil(inner_scale * k)).
  double inner_scale = 1.0;
  double weight_exponent = 0.5;
  double exact_eta = 0.0;
  double stoch_l2 = 0.0;
  /// Base stochastic step l1; 0 derives it from l2. An explicit value may not
  /// exceed the derived one.
  double stoch_l1_override = 0.0;
  int horizon = 20;
  TrajectoryRule trajectories;
  std::uint64_t seed = 0;
  /// Bound on sum_k H_k; validate_config rejects schedules above it.
  long long max_total_inner = 20'000'000;
  /// theta_1; the uniform policy when empty.
  std::vector<double> initial_theta;

  double modulus() const { return 1.0 / beta - lipschitz; }
  /// L^2 + 1/beta^2.
  double regularized_lipschitz_sq() const { return lipschitz * lipschitz + 1.0 / (beta * beta); }
  double eta_tilde() const { return 1.0 / (2.0 * std::sqrt(regularized_lipschitz_sq())); }
  double stoch_l1() const;
  double stoch_eta(int h) const;
  int inner_steps(int k) const;

  /// Defaults for the given mode: beta = 0.5 / L, eta at 0.9 of its window,
  /// l2 at its lower limit, weight exponent 1/2 (exact) or 1/4 (stochastic).
  static SolverConfig defaults(SolverMode mode, double lipschitz);
};

/// Endpoints of the constant inner step-size window for exact mode.
struct StepWindow {
  double inverse_modulus;  // 1 / (1/beta - L)
  double second;           // (-(mu) + sqrt(mu^2 + 32 Lk^2)) / 16
  double third;            // (-(mu) + sqrt(mu^2 + 8 Lk^2)) / 32
  /// The same two roots with the 1/Lk^2 factor that the convergence argument
  /// actually needs: 8 Lk^2 eta^2 + mu eta <= 1 and 4 Lk^2 eta^2 + mu eta <= 1/2.
  double contraction_second;
  double contraction_third;

  double upper() const;             // min of the first three
  double contraction_upper() const; // min over all five
};

StepWindow step_window(double lipschitz, double beta);

ValidationReport validate_config(const SolverConfig& cfg);

/// argmin_theta <2 eta g, theta> + ||theta - z||^2 = project(z - eta g).
std::vector<double> prox_step(std::span<const double> z, std::span<const double> g, double eta,
                              const ParamSpace& space);

struct InnerDiagnostics {
  int steps = 0;
  double last_step_norm = 0.0;  // ||theta^{H+1} - theta^H||
  long long field_evaluations = 0;
};

struct InnerResult {
  std::vector<double> theta;
  std::vector<double> z;
  InnerDiagnostics diagnostics;
};

/// Called after every inner step h with (h, theta^{h+1}, theta^h, z^{h+1}).
using InnerObserver = std::function<void(int, std::span<const double>, std::span<const double>,
                                         std::span<const double>)>;

/// Single-call extra-gradient iterations on F_k starting from theta^1 = z^1 = start.
/// With `reuse_field` the evaluation at theta^{h+1} serves as the evaluation at
/// theta^h of the next step, so each step costs one fresh call after the first.
InnerResult inner_loop(const FieldFn& field_k, std::span<const double> start, int steps,
                       const std::function<double(int)>& step_size, const ParamSpace& space,
                       bool reuse_field, const InnerObserver& observer = {});

/// theta_{k+1} = prox_step(z, F_k(z), eta_tilde).
std::vector<double> outer_step(const FieldFn& field_k, std::span<const double> z_final,
                               double eta_tilde, const ParamSpace& space);

struct RunRecord {
  std::vector<std::vector<double>> thetas;  // theta_1 .. theta_{K+1}
  std::vector<InnerDiagnostics> inner;      // per outer step k = 1..K
  std::vector<double> weights;              // gamma_k, k = 1..K
  double gamma0 = 0.0;
  int tau = 0;                              // 1-based
  long long field_evaluations = 0;
  long long estimator_calls = 0;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  /// Final estimator call of a stochastic run, enough to regenerate its
  /// trajectories with trajectory_rng().
  std::uint64_t last_estimator_seed = 0;
  int last_estimator_trajectories = 0;
  std::vector<double> last_estimator_point;

  std::span<const double> output() const { return thetas.at(static_cast<std::size_t>(tau - 1)); }
};

/// Exact pseudo gradients, constant inner step, gamma_k = k^{weight_exponent}.
RunRecord run_algorithm1(const TabularGame& game, const ParamSpace& space, const SolverConfig& cfg);

/// G(PO)MDP estimates drawn fresh at every prox line and at the final
/// half-step, eta_h = l1 / h^{2/3}.
RunRecord run_algorithm2(const TabularGame& game, const ParamSpace& space, const SolverConfig& cfg);

/// Draws k in 1..K with probability weights[k-1] / sum(weights).
int sample_tau(std::span<const double> weights, Rng& rng);

/// gamma_k = k^exponent for k = 1..K.
std::vector<double> outer_weights(int outer_iterations, double exponent);

}  // namespace nashvi
