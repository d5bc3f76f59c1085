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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pspe/errors.hpp"
#include "pspe/mdp.hpp"
#include "pspe/metrics.hpp"
#include "pspe/planner.hpp"
#include "pspe/posterior.hpp"
#include "pspe/rng.hpp"

namespace pspe {

enum class AgentKind { Psrl, Pspe, Random };

inline const char* agent_kind_name(AgentKind kind) {
  switch (kind) {
    case AgentKind::Psrl:
      return "psrl";
    case AgentKind::Pspe:
      return "pspe";
    case AgentKind::Random:
      return "random";
  }
  return "unknown";
}

inline constexpr int kDefaultMaxResamples = 100;
inline constexpr double kDefaultDifferenceTol = 0.0;

// Episode-level strategy configuration. beta is the PSPE exploitation
// probability: with probability beta the agent follows an optimal policy
// of the first posterior sample, otherwise it resamples until a different
// optimal-policy set appears and follows a policy from the difference.
// PSRL is the beta = 1 endpoint.
//
// difference_tol widens the first sample's action sets before the
// difference test, so a resample only counts as different where it
// disagrees by more than the tolerance. With continuous posteriors two
// samples almost surely disagree somewhere irrelevant (a coordinate whose
// actions are within noise of each other), which would make the resample
// loop exit immediately and reduce every beta to PSRL; the margin keeps
// the challenger pointed at disagreements that matter. Zero recovers the
// exact set-difference test.
struct AgentConfig {
  AgentKind kind = AgentKind::Psrl;
  double beta = 1.0;
  int max_resamples = kDefaultMaxResamples;
  int max_rejections = kDefaultMaxRejections;
  double tie_tol = kDefaultTieTol;
  double difference_tol = kDefaultDifferenceTol;

  static AgentConfig psrl() { return {}; }
  static AgentConfig pspe(double beta) {
    AgentConfig cfg;
    cfg.kind = AgentKind::Pspe;
    cfg.beta = beta;
    return cfg;
  }
  static AgentConfig random_explorer() {
    AgentConfig cfg;
    cfg.kind = AgentKind::Random;
    return cfg;
  }

  void validate() const {
    if (!(beta >= 0.0 && beta <= 1.0))
      throw InvalidConfig("beta must be in [0, 1]");
    if (max_resamples < 1 || max_rejections < 1)
      throw InvalidConfig("resample and rejection caps must be >= 1");
    if (tie_tol < 0.0) throw InvalidConfig("tie_tol must be >= 0");
    if (difference_tol < 0.0)
      throw InvalidConfig("difference_tol must be >= 0");
  }
};

// Draw one posterior sample, plan it, and pick one of its optimal
// policies uniformly.
inline Policy psrl_select(const MdpBelief& belief, Rng& rng,
                          double tie_tol = kDefaultTieTol) {
  const TabularMdp sampled = sample_mdp(belief, rng);
  const OptimalActionSets sets = backward_induction(sampled, tie_tol);
  return sample_optimal_policy(sets, rng);
}

struct PspeSelection {
  Policy policy;
  int resamples = 0;
  bool fallback = false;
};

// Top-two selection. With probability beta this reduces to psrl_select on
// the first sample. Otherwise it resamples MDPs until the resampled
// optimal set escapes the first one, then draws from the set difference.
// The endpoints beta = 1 and beta = 0 skip the Bernoulli draw, so a
// beta = 1 agent consumes the exact same random stream as PSRL. A fully
// concentrated posterior can make the resample loop spin forever, so after
// max_resamples failures the first sample's optimal policy is used and the
// event is flagged.
inline PspeSelection pspe_select(const MdpBelief& belief,
                                 const AgentConfig& cfg, Rng& rng) {
  cfg.validate();
  PspeSelection out;
  const TabularMdp first = sample_mdp(belief, rng);
  const OptimalActionSets first_sets = backward_induction(first, cfg.tie_tol);
  const bool exploit = cfg.beta >= 1.0
                           ? true
                           : (cfg.beta <= 0.0 ? false
                                              : draw_uniform(rng) < cfg.beta);
  if (exploit) {
    out.policy = sample_optimal_policy(first_sets, rng);
    return out;
  }
  const OptimalActionSets* incumbent = &first_sets;
  OptimalActionSets widened;
  if (cfg.difference_tol > cfg.tie_tol) {
    widen_sets_into(first_sets, cfg.difference_tol, widened);
    incumbent = &widened;
  }
  TabularMdp resampled;
  OptimalActionSets resampled_sets;
  for (int k = 1; k <= cfg.max_resamples; ++k) {
    sample_mdp_into(belief, rng, resampled);
    backward_induction_into(resampled, cfg.tie_tol, resampled_sets);
    if (!product_subset(resampled_sets, *incumbent)) {
      out.resamples = k;
      sample_policy_from_difference_into(resampled_sets, *incumbent, rng,
                                         cfg.max_rejections, out.policy);
      return out;
    }
  }
  out.resamples = cfg.max_resamples;
  out.fallback = true;
  out.policy = sample_optimal_policy(first_sets, rng);
  return out;
}

// Uniform policy: every coordinate independent and uniform over actions.
inline Policy random_select(int num_states, int num_actions, int horizon,
                            Rng& rng) {
  Policy out = Policy::filled(num_states, horizon, 0);
  for (int& a : out.actions) a = draw_index(rng, num_actions);
  return out;
}

struct EpisodeRecord {
  std::int64_t episode = 0;  // 1-based
  Policy policy;
  double realized_reward = 0.0;  // sum of sampled rewards
  double expected_value = 0.0;   // exact value of the policy on the truth
  int resamples = 0;
  bool fallback = false;

  bool operator==(const EpisodeRecord&) const = default;
};

struct RunLog {
  std::vector<EpisodeRecord> episodes;
  std::vector<Trajectory> trajectories;  // kept when record_trajectories
  std::vector<MetricsRow> metrics;
  std::int64_t fallback_count = 0;
};

struct RunOptions {
  int metrics_every = 10;   // 0 disables scheduled metrics
  int eval_samples = 1000;  // posterior samples per metrics point
  bool record_trajectories = true;
  PriorConfig prior{};
};

struct RunResult {
  MdpBelief belief;
  RunLog log;
  std::uint64_t seed = 0;
};

namespace detail {

// Stream tags under one run seed. Metric estimation draws from its own
// per-episode stream, so the followed policies do not depend on the
// metrics cadence.
inline constexpr std::uint64_t kActionStream = 0x61637400ULL;
inline constexpr std::uint64_t kEvalStream = 0x6576616cULL;

inline Policy select_policy(const TabularMdp& mdp, const AgentConfig& cfg,
                            const MdpBelief& belief, Rng& rng,
                            EpisodeRecord& record) {
  switch (cfg.kind) {
    case AgentKind::Psrl:
      return psrl_select(belief, rng, cfg.tie_tol);
    case AgentKind::Pspe: {
      PspeSelection sel = pspe_select(belief, cfg, rng);
      record.resamples = sel.resamples;
      record.fallback = sel.fallback;
      return std::move(sel.policy);
    }
    case AgentKind::Random:
      return random_select(mdp.num_states, mdp.num_actions, mdp.horizon, rng);
  }
  throw InvalidConfig("unknown agent kind");
}

// One episode: select, roll out on the truth, update the belief, log.
inline void run_episode(const TabularMdp& true_mdp, const AgentConfig& cfg,
                        std::int64_t episode, MdpBelief& belief, Rng& action_rng,
                        RegretEvaluator& evaluator, bool record_trajectories,
                        RunLog& log) {
  EpisodeRecord record;
  record.episode = episode;
  record.policy = select_policy(true_mdp, cfg, belief, action_rng, record);
  Trajectory traj =
      simulate_episode(true_mdp, record.policy, action_rng, episode);
  double realized = 0.0;
  for (const Step& step : traj.steps) realized += step.reward;
  record.realized_reward = realized;
  record.expected_value = evaluator.policy_value(record.policy);
  update_belief(belief, traj);
  if (record.fallback) ++log.fallback_count;
  log.episodes.push_back(std::move(record));
  if (record_trajectories) log.trajectories.push_back(std::move(traj));
}

}  // namespace detail

// Runs one agent for num_episodes on the true MDP. All randomness derives
// from the seed: the action stream drives selection and simulation, and
// each scheduled metrics point uses its own stream keyed by the episode
// index. Metrics are measured after the belief update, at every multiple
// of metrics_every and at the final episode.
inline RunResult run_agent(const TabularMdp& true_mdp, const AgentConfig& cfg,
                           int num_episodes, std::uint64_t seed,
                           const RunOptions& options = {}) {
  cfg.validate();
  if (num_episodes < 0) throw InvalidConfig("num_episodes must be >= 0");
  RunResult result;
  result.seed = seed;
  result.belief = init_belief(true_mdp.num_states, true_mdp.num_actions,
                              true_mdp.horizon, true_mdp.initial_dist,
                              options.prior);
  Rng action_rng(derive_seed(seed, {detail::kActionStream}));
  RegretEvaluator evaluator(true_mdp, cfg.tie_tol);
  for (std::int64_t t = 1; t <= num_episodes; ++t) {
    detail::run_episode(true_mdp, cfg, t, result.belief, action_rng, evaluator,
                        options.record_trajectories, result.log);
    const bool scheduled =
        options.metrics_every > 0 &&
        (t % options.metrics_every == 0 || t == num_episodes);
    if (scheduled) {
      Rng eval_rng(derive_seed(
          seed, {detail::kEvalStream, static_cast<std::uint64_t>(t)}));
      MetricsRow row =
          evaluator.estimate(result.belief, options.eval_samples, eval_rng);
      row.episode = t;
      row.fallback_count = result.log.fallback_count;
      result.log.metrics.push_back(std::move(row));
    }
  }
  return result;
}

struct PracticeResult {
  RunLog log;
  MdpBelief belief;
  double practice_end_simple_regret = 0.0;
  double practice_end_theta = 0.0;
  double eval_cum_regret = 0.0;           // expected, evaluation phase only
  double eval_cum_regret_realized = 0.0;  // from sampled rewards
  double total_cum_regret = 0.0;          // expected, both phases
  std::uint64_t seed = 0;
};

// Practice for t_practice episodes with PSPE(beta), measure simple regret
// at the switch point, then keep the same belief and run PSRL for t_eval
// episodes. Cumulative regret is reported for the evaluation phase alone
// (the total across both phases is also recorded). The action stream is
// continuous across the switch, so beta = 1 reproduces a single PSRL run
// of t_practice + t_eval episodes under the same seed.
//
// switch_eval_seed, when given, seeds the switch-point measurement
// independently of the practice configuration.
inline PracticeResult practice_then_evaluate(
    const TabularMdp& true_mdp, AgentConfig practice_cfg, int t_practice,
    int t_eval, std::uint64_t seed, const RunOptions& options = {},
    std::optional<std::uint64_t> switch_eval_seed = std::nullopt) {
  if (t_practice < 0) throw InvalidConfig("t_practice must be >= 0");
  if (t_eval < 1) throw InvalidConfig("t_eval must be >= 1");
  if (practice_cfg.kind == AgentKind::Random)
    throw InvalidConfig("practice phase requires a posterior-sampling agent");
  if (practice_cfg.kind == AgentKind::Psrl) {
    practice_cfg.kind = AgentKind::Pspe;
    practice_cfg.beta = 1.0;
  }
  practice_cfg.validate();
  AgentConfig eval_cfg = practice_cfg;
  eval_cfg.kind = AgentKind::Psrl;
  eval_cfg.beta = 1.0;

  PracticeResult result;
  result.seed = seed;
  MdpBelief belief = init_belief(true_mdp.num_states, true_mdp.num_actions,
                                 true_mdp.horizon, true_mdp.initial_dist,
                                 options.prior);
  Rng action_rng(derive_seed(seed, {detail::kActionStream}));
  RegretEvaluator evaluator(true_mdp, practice_cfg.tie_tol);
  for (std::int64_t t = 1; t <= t_practice; ++t)
    detail::run_episode(true_mdp, practice_cfg, t, belief, action_rng,
                        evaluator, options.record_trajectories, result.log);

  Rng switch_rng(switch_eval_seed.value_or(derive_seed(
      seed, {detail::kEvalStream, static_cast<std::uint64_t>(t_practice)})));
  MetricsRow switch_row =
      evaluator.estimate(belief, options.eval_samples, switch_rng);
  switch_row.episode = t_practice;
  switch_row.fallback_count = result.log.fallback_count;
  result.practice_end_simple_regret = switch_row.simple_regret;
  result.practice_end_theta = switch_row.theta;
  result.log.metrics.push_back(std::move(switch_row));

  for (std::int64_t t = t_practice + 1; t <= t_practice + t_eval; ++t)
    detail::run_episode(true_mdp, eval_cfg, t, belief, action_rng, evaluator,
                        options.record_trajectories, result.log);

  const double mu_star = evaluator.mu_star();
  for (const EpisodeRecord& record : result.log.episodes) {
    const double expected_gap =
        std::max(0.0, mu_star - record.expected_value);
    result.total_cum_regret += expected_gap;
    if (record.episode > t_practice) {
      result.eval_cum_regret += expected_gap;
      result.eval_cum_regret_realized += mu_star - record.realized_reward;
    }
  }
  result.belief = std::move(belief);
  return result;
}

inline PracticeResult practice_then_evaluate(
    const TabularMdp& true_mdp, double beta, int t_practice, int t_eval,
    std::uint64_t seed, const RunOptions& options = {},
    std::optional<std::uint64_t> switch_eval_seed = std::nullopt) {
  return practice_then_evaluate(true_mdp, AgentConfig::pspe(beta), t_practice,
                                t_eval, seed, options, switch_eval_seed);
}

}  // namespace pspe
