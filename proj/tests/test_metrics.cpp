// Copyright 2026 The pspe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pspe/agents.hpp"
#include "pspe/envs.hpp"
#include "pspe/metrics.hpp"

using namespace pspe;

namespace {

TabularMdp two_arm_truth() {
  TabularMdp mdp;
  mdp.num_states = 1;
  mdp.num_actions = 2;
  mdp.horizon = 1;
  mdp.initial_dist = {1.0};
  mdp.transition = {1.0, 1.0};
  mdp.mean_reward = {1.0, 0.0};
  mdp.reward_noise = {1.0, 1.0};
  return validate_mdp(std::move(mdp));
}

// Belief whose statistics are scaled toward a fixed MDP, emulating heavy
// uniform observation of the truth.
MdpBelief concentrated_belief(const TabularMdp& truth, double weight) {
  MdpBelief belief = init_belief(truth.num_states, truth.num_actions,
                                 truth.horizon, truth.initial_dist);
  for (int s = 0; s < truth.num_states; ++s) {
    for (int a = 0; a < truth.num_actions; ++a) {
      const int sa = belief.sa(s, a);
      for (int s2 = 0; s2 < truth.num_states; ++s2)
        belief.transition_counts[static_cast<std::size_t>(sa) *
                                     truth.num_states +
                                 s2] += weight * truth.transition_row(s, a)[s2];
      belief.reward_count[sa] = static_cast<std::int64_t>(weight);
      belief.reward_sum[sa] = weight * truth.reward(s, a);
    }
  }
  return belief;
}

}  // namespace

TEST_CASE("a concentrated posterior has negligible estimated regret") {
  const TabularMdp chain = make_stochastic_chain(5, 0.0);
  const MdpBelief belief = concentrated_belief(chain, 1e5);
  Rng rng(11);
  const MetricsRow row = estimate_simple_regret(belief, chain, 400, rng);
  CHECK(row.simple_regret <= 0.01);
  CHECK(row.theta <= 0.01);
  CHECK(row.simple_regret >= -1e-12);
}

TEST_CASE("a symmetric two-arm belief splits its confidence evenly") {
  const TabularMdp truth = two_arm_truth();
  const MdpBelief prior = init_belief(1, 2, 1, {1.0});
  Rng rng(13);
  const int n = 10000;
  const MetricsRow row = estimate_simple_regret(prior, truth, n, rng);
  const double se = std::sqrt(0.25 / n);
  CHECK(std::abs(row.theta - 0.5) < 3.0 * se);
  // The suboptimal arm's gap is exactly 1, so regret mirrors theta.
  CHECK(std::abs(row.simple_regret - 0.5) < 3.0 * se);
  CHECK(row.eval_samples == n);
}

TEST_CASE("a single optimal draw yields exactly zero regret and theta") {
  const TabularMdp chain = make_stochastic_chain(4, 0.0);
  const MdpBelief belief = concentrated_belief(chain, 1e6);
  Rng rng(17);
  const MetricsRow row = estimate_simple_regret(belief, chain, 1, rng);
  REQUIRE(row.theta == 0.0);
  CHECK(row.simple_regret == 0.0);
}

TEST_CASE("theta behaves like a binomial proportion across seeds") {
  const TabularMdp truth = two_arm_truth();
  const MdpBelief prior = init_belief(1, 2, 1, {1.0});
  const int n = 200, reps = 200;
  std::vector<double> thetas(reps);
  for (int i = 0; i < reps; ++i) {
    Rng rng(derive_seed(555, {static_cast<std::uint64_t>(i)}));
    thetas[i] = estimate_simple_regret(prior, truth, n, rng).theta;
  }
  const double expected_sd = std::sqrt(0.5 * 0.5 / n);
  const double sd = oracle::sample_sd(thetas);
  CHECK(sd < 2.0 * expected_sd);
  CHECK(sd > 0.5 * expected_sd);
}

TEST_CASE("estimate_confidences returns the single policy with weight one") {
  const MdpBelief belief = init_belief(2, 1, 2, {1.0, 0.0});
  Rng rng(19);
  const std::vector<PolicyConfidence> confidences =
      estimate_confidences(belief, 16, rng);
  REQUIRE(confidences.size() == 1);
  CHECK(confidences[0].alpha == 1.0);
}

TEST_CASE("tied optimal sets share confidence through the 1/|set| weight") {
  const MdpBelief belief = init_belief(1, 2, 1, {1.0});
  Rng rng(23);
  // A tie tolerance wider than any sampled reward difference forces every
  // sampled MDP to keep both arms optimal.
  const std::vector<PolicyConfidence> confidences =
      estimate_confidences(belief, 64, rng, /*tie_tol=*/100.0);
  REQUIRE(confidences.size() == 2);
  CHECK(confidences[0].alpha == 0.5);
  CHECK(confidences[1].alpha == 0.5);
}

TEST_CASE("confidences sum to one exactly on dyadic instances") {
  Rng data_rng(29);
  MdpBelief belief = init_belief(2, 2, 2, {1.0, 0.0});
  Trajectory traj;
  traj.steps = {{0, 1, 0.5, 1}, {1, 0, -0.25, 0}};
  update_belief(belief, traj);
  Rng rng(31);
  const std::vector<PolicyConfidence> confidences =
      estimate_confidences(belief, 256, rng);
  REQUIRE(confidences.size() == 16);
  double total = 0.0;
  for (const PolicyConfidence& c : confidences) total += c.alpha;
  CHECK(total == 1.0);
}

TEST_CASE("the paired estimator agrees with the confidence mixture") {
  MdpBelief belief = init_belief(1, 2, 1, {1.0});
  Trajectory traj;
  traj.steps = {{0, 0, 0.8, 0}};
  update_belief(belief, traj);
  const TabularMdp truth = two_arm_truth();

  Rng rng_a(37);
  const std::vector<PolicyConfidence> confidences =
      estimate_confidences(belief, 4096, rng_a);
  double mixture_value = 0.0;
  for (const PolicyConfidence& c : confidences)
    mixture_value += c.alpha * mean_episodic_reward(truth, c.policy);
  const double mixture_regret = 1.0 - mixture_value;

  Rng rng_b(41);
  const int n = 4096;
  const MetricsRow row = estimate_simple_regret(belief, truth, n, rng_b);
  const double se = std::sqrt(0.25 / n);
  CHECK(std::abs(row.simple_regret - mixture_regret) < 3.0 * 2.0 * se);
}

TEST_CASE("sandwich_check enforces the gap bounds") {
  MetricsRow row;
  row.theta = 0.0;
  row.simple_regret = 0.0;
  CHECK(sandwich_check(row, 0.2, 1.0));
  row.simple_regret = 0.01;
  CHECK_FALSE(sandwich_check(row, 0.2, 1.0));

  // Two-policy instance: a single gap of 1 pins both bounds.
  row.theta = 0.5;
  row.simple_regret = 0.5;
  CHECK(sandwich_check(row, 1.0, 1.0));
  row.simple_regret = 0.49;
  CHECK_FALSE(sandwich_check(row, 1.0, 1.0));
}

TEST_CASE("every metrics row of a chain-3 run respects the enumerated gaps") {
  const TabularMdp chain = make_stochastic_chain(3);
  const GapSummary gaps = enumerate_gaps(chain);
  RunOptions options;
  options.metrics_every = 10;
  options.eval_samples = 200;
  options.record_trajectories = false;
  const RunResult rr =
      run_agent(chain, AgentConfig::pspe(0.5), 100, derive_seed(43, {0}),
                options);
  REQUIRE(rr.log.metrics.size() == 10);
  for (const MetricsRow& row : rr.log.metrics) {
    CHECK(row.theta >= 0.0);
    CHECK(row.theta <= 1.0);
    CHECK(sandwich_check(row, gaps.min_gap, gaps.max_gap));
  }
}

TEST_CASE("cumulative regret of optimal policies is identically zero") {
  const TabularMdp chain = make_stochastic_chain(4, 0.0);
  const std::vector<Policy> policies(5, Policy::filled(4, 4, kChainRight));
  for (double value : cumulative_regret(chain, policies))
    CHECK(value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("cumulative regret accumulates a unit gap per episode") {
  TabularMdp bandit;
  bandit.num_states = 1;
  bandit.num_actions = 2;
  bandit.horizon = 1;
  bandit.initial_dist = {1.0};
  bandit.transition = {1.0, 1.0};
  bandit.mean_reward = {1.0, 0.0};
  bandit.reward_noise = {0.0, 0.0};
  const std::vector<Policy> policies(10, Policy::filled(1, 1, 1));
  const std::vector<double> series =
      cumulative_regret(validate_mdp(bandit), policies);
  REQUIRE(series.size() == 10);
  CHECK(series.back() == doctest::Approx(10.0));
  for (std::size_t i = 1; i < series.size(); ++i)
    CHECK(series[i] >= series[i - 1]);
}

TEST_CASE("cumulative regret recomputed from a run log matches") {
  const TabularMdp chain = make_stochastic_chain(5);
  RunOptions options;
  options.metrics_every = 0;
  options.record_trajectories = false;
  const RunResult rr = run_agent(chain, AgentConfig::psrl(), 40,
                                 derive_seed(47, {1}), options);
  std::vector<Policy> policies;
  for (const EpisodeRecord& record : rr.log.episodes)
    policies.push_back(record.policy);
  const std::vector<double> series = cumulative_regret(chain, policies);

  const RegretEvaluator evaluator(chain);
  double direct = 0.0;
  for (const EpisodeRecord& record : rr.log.episodes)
    direct += std::max(0.0, evaluator.mu_star() - record.expected_value);
  CHECK(series.back() == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("fit_decay_rate recovers an exact exponential") {
  std::vector<std::pair<std::int64_t, double>> series;
  for (int t = 10; t <= 500; t += 10)
    series.emplace_back(t, std::exp(-0.02 * t));
  const DecayFit fit = fit_decay_rate(series, 10, 500);
  CHECK(std::abs(fit.rate - 0.02) < 1e-9);
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.n_points == 50);
}

TEST_CASE("fit_decay_rate returns zero rate for a constant series") {
  std::vector<std::pair<std::int64_t, double>> series;
  for (int t = 0; t <= 100; t += 10) series.emplace_back(t, 0.25);
  const DecayFit fit = fit_decay_rate(series, 0, 100);
  CHECK(fit.rate == doctest::Approx(0.0));
  CHECK(fit.r_squared == doctest::Approx(1.0));
}

TEST_CASE("fit_decay_rate rejects unusable windows") {
  std::vector<std::pair<std::int64_t, double>> series = {
      {10, 0.5}, {20, 0.4}, {30, 0.0}, {40, 0.0}};
  CHECK_THROWS_AS(fit_decay_rate(series, 10, 40), DegenerateWindow);
  CHECK_THROWS_AS(fit_decay_rate(series, 40, 10), DegenerateWindow);
}
