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
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nashvi/metrics.hpp"
#include "nashvi/vi_solver.hpp"

namespace nashvi::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kNumericError = 2, kIoError = 3 };

inline constexpr const char* kVersion = "1.0.0";

struct RunConfig {
  std::string game_path = NASHVI_DEFAULT_GAME;
  std::string algorithm = "exact";  // exact | gpomdp
  std::optional<int> outer_iterations;
  std::uint64_t seed = 7;
  std::optional<double> beta;
  std::optional<double> eta;
  double lipschitz = 5.63;
  double m1 = 1.0;
  std::optional<int> trajectories;  // fixed K1
  std::string trajectory_rule;      // "" or "K+1"
  int horizon = 20;
  std::optional<std::string> weights;  // half | quarter
  std::string out_path = "nashvi_run.csv";
  int verbosity = 1;
  std::string dump_values;
  std::string dump_trajectories;
  bool verify = false;
};

/// Solver settings after defaults and overrides; throws ConfigError on
/// unknown names or conflicting options.
SolverConfig solver_config(const RunConfig& cfg);

/// `k,theta_a0_s0_c0,...,gap_agent_1,...,sup_gap,eps_weighted`.
std::string csv_header(const ParamSpace& space);

/// One row per outer iterate k = 1..K. Numbers use 17 significant digits.
void write_csv(std::ostream& out, const ParamSpace& space, const RunRecord& record,
               const GapReport& report);

nlohmann::json metadata(const RunConfig& cfg, const SolverConfig& solver, const TabularGame& game,
                        const Parameterization& param, const RunRecord& record);

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches; returns the process exit code.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nashvi::cli
