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
#include <string>
#include <vector>

#include "nashvi/game.hpp"
#include "nashvi/policy.hpp"

namespace nashvi {

/// Central differences of each agent's total reward in that agent's own
/// coordinates, concatenated like pseudo_gradient's negation.
std::vector<double> finite_difference_gradient(const TabularGame& game, const PolicyParams& params,
                                               double step);

struct VerifyOptions {
  double lipschitz = 5.63;
  double beta = 0.5 / 5.63;
  double m1 = 1.0;
  std::uint64_t seed = 0;

  int gradient_points = 100;
  double fd_step = 1e-6;
  double gradient_rtol = 1e-4;

  int invariant_points = 100;
  double invariant_tol = 1e-9;

  int pairs = 10000;
  double slack_tol = 1e-9;

  int coverage_repeats = 400;
  int coverage_horizon = 20;
  int coverage_trajectories = 100;
  double coverage_delta = 0.5;

  int grid_per_axis = 9;
  std::size_t max_grid_points = 200000;
  int mvi_random_points = 1000;

  int domination_points = 1000;
};

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

SuiteResult check_gradient(const TabularGame& game, const ParamSpace& space, const VerifyOptions& opts);
SuiteResult check_invariants(const TabularGame& game, const ParamSpace& space, const VerifyOptions& opts);
SuiteResult check_lipschitz(const TabularGame& game, const ParamSpace& space, const VerifyOptions& opts);
SuiteResult check_monotonicity(const TabularGame& game, const ParamSpace& space, const VerifyOptions& opts);
SuiteResult check_coverage(const TabularGame& game, const ParamSpace& space, const VerifyOptions& opts);
SuiteResult check_mvi(const TabularGame& game, const ParamSpace& space, const VerifyOptions& opts);
SuiteResult check_domination(const TabularGame& game, const ParamSpace& space, const VerifyOptions& opts);

/// Number of points parameter_grid(space, per_axis) would produce.
std::size_t grid_size(const ParamSpace& space, int per_axis);

/// Every suite above, in order.
std::vector<SuiteResult> run_verify(const TabularGame& game, const ParamSpace& space,
                                    const VerifyOptions& opts);

}  // namespace nashvi
