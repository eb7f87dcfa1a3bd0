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

// Acceptance suite: one PASS/FAIL line per criterion. Pass a criterion
// number to run just that one; no argument runs all of them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "nashvi/estimator.hpp"
#include "nashvi/exact_eval.hpp"
#include "nashvi/metrics.hpp"
#include "nashvi/parallel.hpp"
#include "nashvi/verify.hpp"
#include "nashvi/vi_solver.hpp"
#include "oracles.hpp"

using namespace nashvi;

namespace {

constexpr double kAnchorL = 5.63;
constexpr double kAnchorM1 = 1.0;

struct Outcome {
  bool passed;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> body;
};

std::string fmt(auto&&... parts) {
  std::ostringstream s;
  s.precision(6);
  (s << ... << parts);
  return s.str();
}

struct Example {
  GameDocument doc = oracle::bundled("two_player.cfg");
  ParamSpace space = oracle::space_of(doc);
  const TabularGame& game() const { return doc.game; }
};

VerifyOptions anchor_options() {
  VerifyOptions o;
  o.lipschitz = kAnchorL;
  o.beta = 0.5 / kAnchorL;
  o.m1 = kAnchorM1;
  o.seed = 2024;
  return o;
}

Outcome from_suite(const SuiteResult& r) { return {r.passed, r.detail}; }

Outcome gradient_oracle() {
  const Example ex;
  VerifyOptions o = anchor_options();
  o.gradient_points = 100;
  o.fd_step = 1e-6;
  o.gradient_rtol = 1e-4;
  return from_suite(check_gradient(ex.game(), ex.space, o));
}

Outcome bellman_invariants() {
  // Residuals against kernels and rewards rebuilt independently of the library.
  double worst = 0.0;
  int points = 0;
  for (const char* name : {"two_player.cfg", "zero_reward.cfg", "coordination.cfg"}) {
    const auto doc = oracle::bundled(name);
    const ParamSpace sp = oracle::space_of(doc);
    const TabularGame& g = doc.game;
    const auto n = static_cast<std::size_t>(g.n_states());
    Rng rng = substream(7, Stream::kSampling, points);
    for (const auto& theta : random_points(sp, 100, rng)) {
      ++points;
      const PolicyParams p(sp, theta);
      const auto kernel = oracle::kernel(g, p);
      const auto d = discounted_occupancy(g, p);
      for (std::size_t t = 0; t < n; ++t) {
        double inflow = (1 - g.discount()) * g.initial_dist()[t];
        for (std::size_t s = 0; s < n; ++s) inflow += g.discount() * kernel[s][t] * d(static_cast<long>(s));
        worst = std::max(worst, std::abs(inflow - d(static_cast<long>(t))));
      }
      for (int i = 0; i < g.n_agents(); ++i) {
        const auto v = value_function(g, p, i);
        const auto q = action_value(g, p, i);
        for (std::size_t s = 0; s < n; ++s) {
          double r = 0, avg = 0, cont = 0;
          for (int a = 0; a < g.n_joint(); ++a) {
            const double pa = oracle::joint_prob(g, p, static_cast<int>(s), a);
            r += pa * g.reward(i, static_cast<int>(s), a);
            avg += pa * q(static_cast<long>(s), a);
          }
          for (std::size_t t = 0; t < n; ++t) cont += kernel[s][t] * v(static_cast<long>(t));
          worst = std::max(worst, std::abs(r + g.discount() * cont - v(static_cast<long>(s))));
          worst = std::max(worst, std::abs(avg - v(static_cast<long>(s))));
        }
      }
    }
  }
  return {worst <= 1e-9, fmt("max residual ", worst, " over ", points, " points in 3 games (limit 1e-09)")};
}

Outcome lipschitz_anchor() {
  const Example ex;
  VerifyOptions o = anchor_options();
  o.pairs = 10000;
  return from_suite(check_lipschitz(ex.game(), ex.space, o));
}

Outcome strong_monotonicity() {
  const Example ex;
  VerifyOptions o = anchor_options();
  o.pairs = 10000;
  o.slack_tol = 1e-9;
  return from_suite(check_monotonicity(ex.game(), ex.space, o));
}

Outcome gradient_domination() {
  const Example ex;
  VerifyOptions o = anchor_options();
  o.domination_points = 1000;
  return from_suite(check_domination(ex.game(), ex.space, o));
}

Outcome exact_convergence() {
  const Example ex;
  SolverConfig cfg = SolverConfig::defaults(SolverMode::kExact, kAnchorL);
  cfg.outer_iterations = 300;
  cfg.seed = 7;
  const RunRecord run = run_algorithm1(ex.game(), ex.space, cfg);
  const std::span<const std::vector<double>> iterates(run.thetas.data(), 300);
  const GapReport report = gap_report(ex.game(), ex.space, iterates, cfg.weight_exponent);
  const double ratio = report.eps[299] / report.eps[9];
  const auto eq = enumerate_pure_equilibrium(ex.game(), ex.space);
  if (!eq) return {false, "no pure equilibrium to compare against"};
  double dist = 0;
  for (std::size_t c = 0; c < ex.space.dim(); ++c) dist += std::pow(run.thetas.back()[c] - (*eq)[c], 2);
  dist = std::sqrt(dist);
  return {ratio <= 0.2 && dist <= 0.05,
          fmt("eps(300)/eps(10) = ", ratio, " (limit 0.2), ||theta_301 - theta*|| = ", dist, " (limit 0.05), ",
              run.field_evaluations, " field evaluations")};
}

Outcome sampled_convergence() {
  const Example ex;
  std::vector<double> ratios;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SolverConfig cfg = SolverConfig::defaults(SolverMode::kStochastic, kAnchorL);
    cfg.outer_iterations = 200;
    cfg.horizon = 20;
    cfg.trajectories = {TrajectoryRule::Kind::kOuterPlusOne, 0};
    cfg.seed = seed;
    const RunRecord run = run_algorithm2(ex.game(), ex.space, cfg);
    const std::span<const std::vector<double>> iterates(run.thetas.data(), 200);
    const GapReport report = gap_report(ex.game(), ex.space, iterates, cfg.weight_exponent);
    ratios.push_back(report.eps[199] / report.eps[9]);
  }
  std::vector<double> sorted = ratios;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[2];
  std::ostringstream all;
  for (double r : ratios) all << (all.tellp() > 0 ? ", " : "") << std::setprecision(3) << r;
  return {median <= 0.3, fmt("median eps(200)/eps(10) over seeds 1-5 = ", median, " (limit 0.3); per seed ", all.str())};
}

Outcome estimator_coverage() {
  const Example ex;
  VerifyOptions o = anchor_options();
  o.coverage_repeats = 400;
  o.coverage_horizon = 20;
  o.coverage_trajectories = 100;
  o.coverage_delta = 0.5;
  return from_suite(check_coverage(ex.game(), ex.space, o));
}

Outcome estimator_unbiased() {
  const Example ex;
  const int horizon = 3, batches = 200, per_batch = 500;
  int failures = 0;
  double worst = 0;
  int point_index = 0;
  for (const std::vector<double>& theta : {std::vector<double>{0.5, 0.5, 0.5, 0.5}, std::vector<double>{0.2, 0.9, 0.7, 0.35}}) {
    const PolicyParams p(ex.space, theta);
    const auto truth = oracle::truncated_field(ex.game(), ex.space, theta, horizon);
    std::vector<double> sum(4, 0.0), sq(4, 0.0);
    for (int b = 0; b < batches; ++b) {
      const auto est = gpomdp_estimate(ex.game(), p, horizon, per_batch,
                                       estimator_call_seed(31 + point_index, static_cast<std::uint64_t>(b))).field();
      for (std::size_t c = 0; c < 4; ++c) {
        sum[c] += est[c];
        sq[c] += est[c] * est[c];
      }
    }
    for (std::size_t c = 0; c < 4; ++c) {
      const double mean = sum[c] / batches;
      const double se = std::sqrt((sq[c] / batches - mean * mean) / (batches - 1));
      const double z = std::abs(mean - truth[c]) / se;
      worst = std::max(worst, z);
      failures += z > 3.0;
    }
    ++point_index;
  }
  return {failures == 0, fmt("max |mean - F(theta,3)| / SE = ", worst, " over 8 coordinates (limit 3)")};
}

Outcome tau_law() {
  double worst_p = 1.0;
  for (double exponent : {0.5, 0.25}) {
    const auto w = outer_weights(10, exponent);
    double total = 0;
    for (double x : w) total += x;
    std::vector<double> probs;
    for (double x : w) probs.push_back(x / total);
    Rng rng = substream(99, Stream::kTau, static_cast<std::uint64_t>(exponent * 100));
    std::vector<long> counts(10, 0);
    for (int k = 0; k < 100000; ++k) ++counts[static_cast<std::size_t>(sample_tau(w, rng) - 1)];
    worst_p = std::min(worst_p, oracle::chi_square_p(counts, probs));
  }
  return {worst_p > 1e-3, fmt("min chi-square p-value ", worst_p, " over both exponents (limit 0.001)")};
}

Outcome mvi_residual_check() {
  const Example ex;
  VerifyOptions o = anchor_options();
  o.grid_per_axis = 9;
  o.mvi_random_points = 1000;
  return from_suite(check_mvi(ex.game(), ex.space, o));
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "nashvi_acceptance_determinism";
  fs::create_directories(dir);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  };
  auto run = [&](const std::vector<std::string>& extra, int threads, const std::string& file) {
    parallel::set_thread_cap(threads);
    std::vector<std::string> args{"nashvi", "run", "--out", (dir / file).string(), "-q"};
    args.insert(args.end(), extra.begin(), extra.end());
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  };
  const int saved = parallel::thread_cap();
  const std::vector<std::string> exact{"--algorithm", "exact", "--K", "300", "--seed", "7"};
  const std::vector<std::string> stoch{"--algorithm", "gpomdp", "--K", "40", "--T", "20", "--K1-rule", "K+1", "--seed", "7"};
  int codes = 0;
  codes |= run(exact, 1, "e1.csv") | run(exact, 1, "e2.csv") | run(exact, 4, "e4.csv");
  codes |= run(stoch, 1, "s1.csv") | run(stoch, 1, "s2.csv") | run(stoch, 4, "s4.csv");
  parallel::set_thread_cap(saved);
  const bool same_exact = slurp(dir / "e1.csv") == slurp(dir / "e2.csv") && slurp(dir / "e1.csv") == slurp(dir / "e4.csv");
  const bool same_stoch = slurp(dir / "s1.csv") == slurp(dir / "s2.csv") && slurp(dir / "s1.csv") == slurp(dir / "s4.csv");
  const bool nonempty = !slurp(dir / "e1.csv").empty() && !slurp(dir / "s1.csv").empty();
  fs::remove_all(dir);
  return {codes == 0 && same_exact && same_stoch && nonempty,
          fmt("exact runs identical: ", same_exact ? "yes" : "no", ", gpomdp runs identical: ", same_stoch ? "yes" : "no",
              " (thread caps 1, 1, 4)")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "gradient oracle", 5, gradient_oracle},
      {2, "Bellman/occupancy invariants", 5, bellman_invariants},
      {3, "Lipschitz anchor L = 5.63", 10, lipschitz_anchor},
      {4, "strong monotonicity", 10, strong_monotonicity},
      {5, "gradient domination M1 = 1", 30, gradient_domination},
      {6, "exact solver convergence", 120, exact_convergence},
      {7, "sampled solver convergence", 600, sampled_convergence},
      {8, "estimator coverage", 300, estimator_coverage},
      {9, "estimator unbiasedness at T = 3", 120, estimator_unbiased},
      {10, "tau_K law", 5, tau_law},
      {11, "MVI residual", 30, mvi_residual_check},
      {12, "determinism", 600, determinism},
  };
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);
  if (only < 0 || only > static_cast<int>(criteria.size())) {
    std::fprintf(stderr, "usage: %s [criterion 1-%zu]\n", argv[0], criteria.size());
    return 2;
  }
  bool all = true;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto started = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    const bool in_time = secs <= c.budget_seconds;
    const bool pass = o.passed && in_time;
    all = all && pass;
    std::printf("%s [%2d] %s: %s; %.2f s (budget %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs, c.budget_seconds);
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
