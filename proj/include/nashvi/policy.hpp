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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nashvi/rng.hpp"

namespace nashvi {

enum class ParamKind { kDirect, kAlphaGreedy, kTwoActionBox };

struct Parameterization {
  ParamKind kind = ParamKind::kDirect;
  /// Exploration weight. Must be 0 for Direct, in (0,1) for AlphaGreedy and
  /// in [0,1) for TwoActionBox.
  double alpha = 0.0;
};

std::string to_string(ParamKind kind);
ParamKind parse_param_kind(const std::string& name);

inline constexpr double kFeasibilityTolerance = 1e-10;

/// Feasible parameter set: a product over agents and states of simplices
/// (Direct, AlphaGreedy) or unit intervals (TwoActionBox).
///
/// The flat layout is agent-major, then state, then the per-state block
/// (|A_i| coordinates, or a single coordinate for TwoActionBox).
class ParamSpace {
 public:
  ParamSpace(Parameterization param, int n_states, std::vector<int> n_actions);

  const Parameterization& parameterization() const { return param_; }
  ParamKind kind() const { return param_.kind; }
  double alpha() const { return param_.alpha; }
  int n_agents() const { return static_cast<int>(n_actions_.size()); }
  int n_states() const { return n_states_; }
  int n_actions(int agent) const { return n_actions_[static_cast<std::size_t>(agent)]; }

  /// Coordinates per (agent, state) block.
  int block_size(int agent) const {
    return param_.kind == ParamKind::kTwoActionBox ? 1 : n_actions(agent);
  }
  std::size_t agent_offset(int agent) const { return offsets_[static_cast<std::size_t>(agent)]; }
  std::size_t agent_dim(int agent) const {
    return offsets_[static_cast<std::size_t>(agent) + 1] - offsets_[static_cast<std::size_t>(agent)];
  }
  std::size_t dim() const { return offsets_.back(); }
  std::size_t index(int agent, int s, int c) const {
    return agent_offset(agent) + static_cast<std::size_t>(s * block_size(agent) + c);
  }

  /// Derivative of pi_i(a | s) with respect to coordinate `c` of the same
  /// state's block. Constant because every supported parameterization is affine.
  double prob_slope(int agent, int a, int c) const;

  /// sqrt(sum_i D_i^2) where D_i is the diameter of Theta_i.
  double diameter() const;

  /// Euclidean projection of an arbitrary point onto the feasible set.
  std::vector<double> project(std::span<const double> point) const;

  bool contains(std::span<const double> point, double tol = kFeasibilityTolerance) const;

  /// The uniform policy expressed in parameters.
  std::vector<double> uniform_point() const;

  /// Parameter vector of the deterministic rule `actions[s]` for one agent
  /// (a vertex of Theta_i), written into that agent's slice of `theta`.
  void set_vertex(std::span<double> theta, int agent, std::span<const int> actions) const;

  bool operator==(const ParamSpace& other) const = default;

 private:
  Parameterization param_;
  int n_states_;
  std::vector<int> n_actions_;
  std::vector<std::size_t> offsets_;
};

/// Euclidean projection onto the probability simplex (sort-and-threshold).
std::vector<double> project_simplex(std::span<const double> point);

/// A feasible parameter vector together with its space. Construction checks
/// feasibility and throws std::domain_error on violation.
class PolicyParams {
 public:
  PolicyParams(ParamSpace space, std::vector<double> theta);

  /// Skips the feasibility check. The policy formulas extend affinely off the
  /// feasible set, which finite-difference oracles rely on.
  static PolicyParams unchecked(ParamSpace space, std::vector<double> theta);

  const ParamSpace& space() const { return space_; }
  std::span<const double> theta() const { return theta_; }
  std::span<const double> agent_theta(int agent) const {
    return std::span<const double>(theta_).subspan(space_.agent_offset(agent),
                                                   space_.agent_dim(agent));
  }
  double operator[](std::size_t k) const { return theta_[k]; }

 private:
  struct NoCheck {};
  PolicyParams(ParamSpace space, std::vector<double> theta, NoCheck)
      : space_(std::move(space)), theta_(std::move(theta)) {}

  ParamSpace space_;
  std::vector<double> theta_;
};

/// Projects `point` and wraps the result.
PolicyParams project(std::span<const double> point, const ParamSpace& space);

double action_prob(const PolicyParams& params, int agent, int s, int a);

/// pi_i(. | s) as a vector over A_i.
std::vector<double> action_probs(const PolicyParams& params, int agent, int s);

/// d pi_i(a | s) / d theta_i, dense over agent i's coordinates.
std::vector<double> grad_theta_prob(const PolicyParams& params, int agent, int s, int a);

/// d log pi_i(a | s) / d theta_i. Throws std::domain_error when pi_i(a|s) = 0.
std::vector<double> grad_log_prob(const PolicyParams& params, int agent, int s, int a);

int sample_action(const PolicyParams& params, int agent, int s, Rng& rng);

/// Supremum over the feasible set of ||grad_log_prob||, in closed form.
/// Infinite for Direct (probabilities can vanish).
double grad_log_prob_sup(const ParamSpace& space);

}  // namespace nashvi
