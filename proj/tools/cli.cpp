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

#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>

#include "nashvi/config_io.hpp"
#include "nashvi/estimator.hpp"
#include "nashvi/exact_eval.hpp"
#include "nashvi/parallel.hpp"
#include "nashvi/verify.hpp"

namespace nashvi::cli {

using nlohmann::json;

namespace {

SolverMode parse_mode(const std::string& algorithm) {
  if (algorithm == "exact") return SolverMode::kExact;
  if (algorithm == "gpomdp") return SolverMode::kStochastic;
  throw ConfigError("unknown algorithm '" + algorithm + "' (expected exact or gpomdp)");
}

std::string format(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

// Writes through a temporary so a failed run never leaves half a file.
bool write_file(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    out << contents;
    if (!out.flush()) return false;
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) std::filesystem::remove(tmp, ec);
  return !ec;
}

std::string dump_values(const TabularGame& game, const PolicyParams& params, int k) {
  const FieldEvaluation eval = FieldEvaluation::evaluate(game, params);
  std::ostringstream out;
  out << "# exact quantities at theta_" << k << "\n";
  out << "quantity,agent,state,joint_action,value\n";
  for (int s = 0; s < game.n_states(); ++s)
    out << "d,," << s << ",," << format(eval.occupancy(s)) << "\n";
  for (int i = 0; i < game.n_agents(); ++i) {
    const auto& v = eval.value[static_cast<std::size_t>(i)];
    const auto& q = eval.qvalue[static_cast<std::size_t>(i)];
    out << "J," << i + 1 << ",,," << format(eval.total_reward[static_cast<std::size_t>(i)]) << "\n";
    for (int s = 0; s < game.n_states(); ++s) out << "V," << i + 1 << "," << s << ",," << format(v(s)) << "\n";
    for (int s = 0; s < game.n_states(); ++s)
      for (int a = 0; a < game.n_joint(); ++a)
        out << "Q," << i + 1 << "," << s << "," << a << "," << format(q(s, a)) << "\n";
  }
  return out.str();
}

std::string dump_trajectories(const TabularGame& game, const ParamSpace& space, const RunRecord& record,
                              int horizon) {
  const PolicyParams params(space, record.last_estimator_point);
  std::ostringstream out;
  out << "# final estimator call: seed " << record.last_estimator_seed << ", "
      << record.last_estimator_trajectories << " trajectories\n";
  out << "trajectory,step,state,joint_action";
  for (int i = 0; i < game.n_agents(); ++i) out << ",reward_agent_" << i + 1;
  out << "\n";
  for (int j = 0; j < record.last_estimator_trajectories; ++j) {
    Rng rng = trajectory_rng(record.last_estimator_seed, static_cast<std::uint64_t>(j));
    const Trajectory traj = rollout(game, params, horizon, rng);
    for (std::size_t t = 0; t < traj.length(); ++t) {
      out << j << "," << t << "," << traj.states[t] << "," << traj.joint_actions[t];
      for (int i = 0; i < game.n_agents(); ++i) out << "," << format(traj.reward(t, i, game.n_agents()));
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace

SolverConfig solver_config(const RunConfig& cfg) {
  const SolverMode mode = parse_mode(cfg.algorithm);
  if (!(cfg.lipschitz > 0.0) || !std::isfinite(cfg.lipschitz))
    throw ConfigError("L must be positive and finite");
  SolverConfig solver = SolverConfig::defaults(mode, cfg.lipschitz);
  solver.seed = cfg.seed;
  solver.horizon = cfg.horizon;
  if (cfg.outer_iterations) solver.outer_iterations = *cfg.outer_iterations;
  if (cfg.beta) {
    // Dependent defaults follow beta unless overridden as well.
    solver.beta = *cfg.beta;
    if (solver.beta > 0.0 && solver.beta * solver.lipschitz < 1.0) {
      solver.exact_eta = 0.9 * step_window(solver.lipschitz, solver.beta).contraction_upper();
      solver.stoch_l2 = std::max(solver.modulus(), 6.0 * solver.regularized_lipschitz_sq());
    }
  }
  if (cfg.eta) {
    if (mode == SolverMode::kExact) solver.exact_eta = *cfg.eta;
    else solver.stoch_l1_override = *cfg.eta;
  }
  if (cfg.weights) {
    if (*cfg.weights == "half") solver.weight_exponent = 0.5;
    else if (*cfg.weights == "quarter") solver.weight_exponent = 0.25;
    else throw ConfigError("--weights must be half or quarter, got '" + *cfg.weights + "'");
  }
  if (cfg.trajectories && !cfg.trajectory_rule.empty())
    throw ConfigError("--K1 and --K1-rule are mutually exclusive");
  if (cfg.trajectories) {
    solver.trajectories = {TrajectoryRule::Kind::kFixed, *cfg.trajectories};
  } else if (!cfg.trajectory_rule.empty()) {
    if (cfg.trajectory_rule != "K+1") throw ConfigError("--K1-rule accepts only K+1");
    solver.trajectories = {TrajectoryRule::Kind::kOuterPlusOne, 0};
  }
  if (!(cfg.m1 > 0.0)) throw ConfigError("M1 must be positive");
  const ValidationReport report = validate_config(solver);
  if (!report.ok()) throw ConfigError("invalid solver settings:\n" + report.summary());
  return solver;
}

std::string csv_header(const ParamSpace& space) {
  std::ostringstream out;
  out << "k";
  for (int i = 0; i < space.n_agents(); ++i)
    for (int s = 0; s < space.n_states(); ++s)
      for (int c = 0; c < space.block_size(i); ++c) out << ",theta_a" << i + 1 << "_s" << s << "_c" << c;
  for (int i = 0; i < space.n_agents(); ++i) out << ",gap_agent_" << i + 1;
  out << ",sup_gap,eps_weighted";
  return out.str();
}

void write_csv(std::ostream& out, const ParamSpace& space, const RunRecord& record,
               const GapReport& report) {
  out << csv_header(space) << "\n";
  for (std::size_t k = 0; k < report.size(); ++k) {
    out << k + 1;
    for (double x : record.thetas[k]) out << "," << format(x);
    for (double g : report.gaps[k]) out << "," << format(g);
    out << "," << format(report.sup_gap[k]) << "," << format(report.eps[k]) << "\n";
  }
}

json metadata(const RunConfig& cfg, const SolverConfig& solver, const TabularGame& game,
              const Parameterization& param, const RunRecord& record) {
  json meta;
  meta["tool"] = "nashvi";
  meta["version"] = kVersion;
  meta["compiler"] = __VERSION__;
  meta["game_path"] = cfg.game_path;
  meta["game"] = game_to_json(game, param);
  meta["algorithm"] = cfg.algorithm;
  meta["seed"] = cfg.seed;
  json s;
  s["K"] = solver.outer_iterations;
  s["L"] = solver.lipschitz;
  s["beta"] = solver.beta;
  s["eta_tilde"] = solver.eta_tilde();
  s["inner_scale"] = solver.inner_scale;
  s["weight_exponent"] = solver.weight_exponent;
  s["M1"] = cfg.m1;
  if (solver.mode == SolverMode::kExact) {
    s["eta"] = solver.exact_eta;
  } else {
    s["l2"] = solver.stoch_l2;
    s["l1"] = solver.stoch_l1();
    s["T"] = solver.horizon;
    if (solver.trajectories.kind == TrajectoryRule::Kind::kFixed) s["K1"] = solver.trajectories.fixed;
    else s["K1_rule"] = "K+1";
  }
  meta["solver"] = s;
  json r;
  r["tau"] = record.tau;
  r["gamma0"] = record.gamma0;
  r["field_evaluations"] = record.field_evaluations;
  r["estimator_calls"] = record.estimator_calls;
  r["output_theta"] = std::vector<double>(record.output().begin(), record.output().end());
  r["final_theta"] = record.thetas.back();
  r["wall_seconds"] = record.wall_seconds;
  r["threads"] = parallel::effective_threads();
  meta["result"] = r;
  return meta;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.verify) return verify(cfg, out, err);

  std::optional<GameDocument> loaded;
  SolverConfig solver;
  try {
    loaded = load_game(cfg.game_path);
    solver = solver_config(cfg);
    if (!cfg.dump_trajectories.empty() && solver.mode != SolverMode::kStochastic)
      throw ConfigError("--dump-trajectories needs --algorithm gpomdp");
  } catch (const ConfigError& e) {
    err << "nashvi: " << e.what() << "\n";
    return kConfigError;
  }
  const GameDocument& doc = *loaded;
  const ParamSpace space(doc.parameterization, doc.game.n_states(),
                         {doc.game.action_counts().begin(), doc.game.action_counts().end()});
  if (cfg.verbosity > 1)
    for (const auto& w : validate_config(solver).warnings) err << "nashvi: warning: " << w << "\n";

  RunRecord record;
  GapReport report;
  std::ostringstream csv;
  std::string values, trajectories;
  try {
    record = solver.mode == SolverMode::kExact ? run_algorithm1(doc.game, space, solver)
                                               : run_algorithm2(doc.game, space, solver);
    const std::span<const std::vector<double>> iterates(record.thetas.data(),
                                                        static_cast<std::size_t>(solver.outer_iterations));
    report = gap_report(doc.game, space, iterates, solver.weight_exponent);
    for (double e : report.eps)
      if (!std::isfinite(e)) throw std::runtime_error("non-finite weighted gap");
    write_csv(csv, space, record, report);
    if (!cfg.dump_values.empty())
      values = dump_values(doc.game, PolicyParams(space, std::vector<double>(record.output().begin(),
                                                                              record.output().end())),
                           record.tau);
    if (!cfg.dump_trajectories.empty()) trajectories = dump_trajectories(doc.game, space, record, solver.horizon);
  } catch (const std::exception& e) {
    err << "nashvi: numeric failure: " << e.what() << "\n";
    return kNumericError;
  }

  const std::string meta_path = cfg.out_path + ".meta.json";
  bool ok = write_file(cfg.out_path, csv.str()) &&
            write_file(meta_path, metadata(cfg, solver, doc.game, doc.parameterization, record).dump(2) + "\n");
  if (ok && !values.empty()) ok = write_file(cfg.dump_values, values);
  if (ok && !trajectories.empty()) ok = write_file(cfg.dump_trajectories, trajectories);
  if (!ok) {
    err << "nashvi: cannot write output next to " << cfg.out_path << "\n";
    return kIoError;
  }

  if (cfg.verbosity > 0) {
    out << "algorithm " << cfg.algorithm << ", K = " << solver.outer_iterations << ", seed " << cfg.seed
        << "\n";
    out << "eps_weighted: k=1 " << format(report.eps.front()) << ", k=" << report.size() << " "
        << format(report.eps.back()) << "\n";
    out << "tau = " << record.tau << ", field evaluations " << record.field_evaluations << ", "
        << std::fixed << std::setprecision(2) << record.wall_seconds << " s\n";
    out << "wrote " << cfg.out_path << " and " << meta_path << "\n";
  }
  return kOk;
}

int verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::optional<GameDocument> loaded;
  SolverConfig solver;
  try {
    loaded = load_game(cfg.game_path);
    solver = solver_config(cfg);
  } catch (const ConfigError& e) {
    err << "nashvi: " << e.what() << "\n";
    return kConfigError;
  }
  const GameDocument& doc = *loaded;
  const ParamSpace space(doc.parameterization, doc.game.n_states(),
                         {doc.game.action_counts().begin(), doc.game.action_counts().end()});
  VerifyOptions opts;
  opts.lipschitz = solver.lipschitz;
  opts.beta = solver.beta;
  opts.m1 = cfg.m1;
  opts.seed = cfg.seed;
  opts.coverage_horizon = solver.horizon;
  if (cfg.trajectories) opts.coverage_trajectories = *cfg.trajectories;

  std::vector<SuiteResult> results;
  try {
    results = run_verify(doc.game, space, opts);
  } catch (const std::exception& e) {
    err << "nashvi: numeric failure: " << e.what() << "\n";
    return kNumericError;
  }
  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed;
    out << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(13) << r.name << r.detail << "\n";
  }
  out << (all ? "all suites passed" : "some suites failed") << "\n";
  return all ? kOk : kNumericError;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  parallel::apply_env_thread_cap();
  RunConfig cfg;
  CLI::App app{"Nash equilibria of tabular stochastic games by proximal variational-inequality methods"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(0, 1);
  CLI::App* run_cmd = app.add_subcommand("run", "run the exact or sampled (gpomdp) extra-gradient solver; the default");
  CLI::App* verify_cmd = app.add_subcommand("verify", "run the property suites against the game");
  run_cmd->fallthrough();
  verify_cmd->fallthrough();

  app.add_option("--game", cfg.game_path, "game file (JSON with comments)")->capture_default_str();
  app.add_option("--algorithm", cfg.algorithm, "exact | gpomdp")->capture_default_str();
  app.add_option("--K", cfg.outer_iterations, "outer iterations (300 exact, 200 gpomdp)");
  app.add_option("--seed", cfg.seed, "run seed")->capture_default_str();
  app.add_option("--beta", cfg.beta, "proximal parameter (default 0.5 / L)");
  app.add_option("--eta", cfg.eta, "inner step (exact) or base step l1 (gpomdp)");
  app.add_option("--L", cfg.lipschitz, "Lipschitz constant of F")->capture_default_str();
  app.add_option("--M1", cfg.m1, "gradient-domination constant")->capture_default_str();
  app.add_option("--T", cfg.horizon, "rollout horizon")->capture_default_str();
  app.add_option("--K1", cfg.trajectories, "fixed trajectories per estimator call");
  app.add_option("--K1-rule", cfg.trajectory_rule, "K+1: k + 1 trajectories at outer iteration k");
  app.add_option("--weights", cfg.weights, "half | quarter (gamma_k = k^0.5 or k^0.25)");
  app.add_option("--out", cfg.out_path, "CSV output path; metadata goes to <out>.meta.json")
      ->capture_default_str();
  app.add_option("--dump-values", cfg.dump_values, "write V, Q, d and J at the output iterate");
  app.add_option("--dump-trajectories", cfg.dump_trajectories, "write the final estimator call's trajectories");
  app.add_flag("--verify", cfg.verify, "run the property suites instead of a solve");
  int quiet = 0, loud = 0;
  app.add_flag("-q,--quiet", quiet, "print nothing on success");
  app.add_flag("-v,--verbose", loud, "print solver warnings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }
  cfg.verbosity = 1 + loud - quiet;
  if (verify_cmd->parsed()) return verify(cfg, out, err);
  return run(cfg, out, err);
}

}  // namespace nashvi::cli
