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

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pspe/mdp.hpp"
#include "pspe/planner.hpp"
#include "pspe/posterior.hpp"
#include "pspe/rng.hpp"

namespace pspe {

inline constexpr double kSandwichSlack = 1e-12;

struct PolicyConfidence {
  Policy policy;
  double alpha = 0.0;
};

// One Monte-Carlo measurement of the belief against the true MDP.
// simple_regret and theta come from the same policy draws (per-sample
// pairing): a draw that is optimal for the truth contributes zero to both,
// a suboptimal draw contributes its exact gap and a count of one.
struct MetricsRow {
  std::int64_t episode = 0;
  double simple_regret = 0.0;
  double theta = 0.0;  // estimated confidence mass on suboptimal policies
  int eval_samples = 0;
  std::int64_t fallback_count = 0;
  std::optional<std::vector<PolicyConfidence>> confidences;
};

struct DecayFit {
  std::int64_t t_start = 0;
  std::int64_t t_end = 0;
  double rate = 0.0;  // per-episode exponential decay rate, negated slope
  double r_squared = 0.0;
  int n_points = 0;
};

// Estimates simple regret and suboptimal confidence mass against a fixed
// true MDP. Each posterior sample is planned, one policy is drawn
// uniformly from its optimal product set (unbiased for the tie-weighted
// confidence mixture), and that policy is scored on the truth.
//
// Holds scratch buffers, so one instance serves one thread at a time; the
// underlying true MDP must outlive the evaluator.
class RegretEvaluator {
 public:
  explicit RegretEvaluator(const TabularMdp& truth,
                           double tie_tol = kDefaultTieTol)
      : truth_(&truth), tie_tol_(tie_tol) {
    backward_induction_into(truth, tie_tol, true_sets_);
    mu_star_ = initial_value(true_sets_, truth.initial_dist);
  }

  const OptimalActionSets& true_sets() const { return true_sets_; }
  double mu_star() const { return mu_star_; }

  MetricsRow estimate(const MdpBelief& belief, int n_samples, Rng& rng) {
    if (n_samples < 1) throw InvalidConfig("n_samples must be >= 1");
    double regret_sum = 0.0;
    std::int64_t suboptimal = 0;
    for (int i = 0; i < n_samples; ++i) {
      sample_mdp_into(belief, rng, sampled_mdp_);
      backward_induction_into(sampled_mdp_, tie_tol_, sampled_sets_);
      sample_optimal_policy_into(sampled_sets_, rng, policy_);
      if (!is_optimal_policy(true_sets_, policy_)) {
        ++suboptimal;
        regret_sum += mu_star_ - policy_value(policy_);
      }
    }
    MetricsRow row;
    row.simple_regret = regret_sum / n_samples;
    row.theta = static_cast<double>(suboptimal) / n_samples;
    row.eval_samples = n_samples;
    return row;
  }

  // Mean episodic reward of a policy on the true MDP, using reusable
  // scratch space.
  double policy_value(const Policy& policy) {
    detail::policy_values_into(*truth_, policy, values_, scratch_);
    double out = 0.0;
    for (int s = 0; s < truth_->num_states; ++s)
      out += truth_->initial_dist[s] * values_[s];
    return out;
  }

 private:
  const TabularMdp* truth_;
  double tie_tol_;
  double mu_star_ = 0.0;
  OptimalActionSets true_sets_;
  TabularMdp sampled_mdp_;
  OptimalActionSets sampled_sets_;
  Policy policy_;
  std::vector<double> values_, scratch_;
};

inline MetricsRow estimate_simple_regret(const MdpBelief& belief,
                                         const TabularMdp& true_mdp,
                                         int n_samples, Rng& rng,
                                         double tie_tol = kDefaultTieTol) {
  RegretEvaluator evaluator(true_mdp, tie_tol);
  return evaluator.estimate(belief, n_samples, rng);
}

// Exact per-policy confidence estimates on enumerable instances: for each
// posterior sample every optimal policy receives 1/|optimal set| weight,
// so the returned weights sum to one. Policies appear in odometer order
// over the action table, suboptimal ones included with weight zero.
//
// Throws TooManyPolicies when A^(S*H) exceeds policy_limit.
inline std::vector<PolicyConfidence> estimate_confidences(
    const MdpBelief& belief, int n_samples, Rng& rng,
    double tie_tol = kDefaultTieTol,
    std::uint64_t policy_limit = kDefaultPolicyLimit) {
  if (n_samples < 1) throw InvalidConfig("n_samples must be >= 1");
  const int coords = belief.num_states * belief.horizon;
  const double log2_total = coords * std::log2(double(belief.num_actions));
  if (log2_total > 62.0)
    throw TooManyPolicies("policy count exceeds policy_limit");
  std::uint64_t total = 1;
  for (int c = 0; c < coords; ++c) total *= belief.num_actions;
  if (total > policy_limit)
    throw TooManyPolicies("policy count exceeds policy_limit");

  std::vector<PolicyConfidence> out(total);
  {
    Policy policy = Policy::filled(belief.num_states, belief.horizon, 0);
    for (std::uint64_t i = 0;; ++i) {
      out[i].policy = policy;
      int c = 0;
      while (c < coords) {
        if (++policy.actions[c] < belief.num_actions) break;
        policy.actions[c] = 0;
        ++c;
      }
      if (c == coords) break;
    }
  }

  TabularMdp sampled;
  OptimalActionSets sets;
  for (int i = 0; i < n_samples; ++i) {
    sample_mdp_into(belief, rng, sampled);
    backward_induction_into(sampled, tie_tol, sets);
    const double weight = 1.0 / static_cast<double>(*sets.policy_count());
    for (auto& entry : out)
      if (is_optimal_policy(sets, entry.policy)) entry.alpha += weight;
  }
  for (auto& entry : out) entry.alpha /= n_samples;
  return out;
}

// Checks theta * min_gap <= simple_regret <= theta * max_gap up to a tiny
// slack for floating-point residue. With per-sample pairing and gaps
// enumerated on the same MDP the inequality holds sample-wise, hence for
// the paired means.
inline bool sandwich_check(const MetricsRow& row, double min_gap,
                           double max_gap, double slack = kSandwichSlack) {
  return row.theta * min_gap - slack <= row.simple_regret &&
         row.simple_regret <= row.theta * max_gap + slack;
}

// Partial sums of the expected per-episode regret mu_star - mu(policy_t).
// Tiny negative increments from rounding are clamped so the series stays
// non-negative and non-decreasing.
inline std::vector<double> cumulative_regret(const TabularMdp& true_mdp,
                                             std::span<const Policy> policies,
                                             double tie_tol = kDefaultTieTol) {
  RegretEvaluator evaluator(true_mdp, tie_tol);
  std::vector<double> out;
  out.reserve(policies.size());
  double cum = 0.0;
  for (const Policy& policy : policies) {
    cum += std::max(0.0, evaluator.mu_star() - evaluator.policy_value(policy));
    out.push_back(cum);
  }
  return out;
}

// Least-squares fit of log(theta) against t over [t_start, t_end]; the
// negated slope estimates the per-episode exponential decay rate.
// Non-positive theta values are excluded from the fit.
//
// Throws DegenerateWindow with fewer than 3 usable points.
inline DecayFit fit_decay_rate(
    std::span<const std::pair<std::int64_t, double>> series,
    std::int64_t t_start, std::int64_t t_end) {
  if (t_start >= t_end) throw DegenerateWindow("window is empty");
  std::vector<double> ts, ys;
  for (const auto& [t, theta] : series) {
    if (t < t_start || t > t_end || !(theta > 0.0)) continue;
    ts.push_back(static_cast<double>(t));
    ys.push_back(std::log(theta));
  }
  const int n = static_cast<int>(ts.size());
  if (n < 3)
    throw DegenerateWindow("fewer than 3 positive points in window");
  double t_mean = 0.0, y_mean = 0.0;
  for (int i = 0; i < n; ++i) {
    t_mean += ts[i];
    y_mean += ys[i];
  }
  t_mean /= n;
  y_mean /= n;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dt = ts[i] - t_mean, dy = ys[i] - y_mean;
    stt += dt * dt;
    sty += dt * dy;
    syy += dy * dy;
  }
  const double slope = stt > 0.0 ? sty / stt : 0.0;
  double ss_res = 0.0;
  for (int i = 0; i < n; ++i) {
    const double resid = ys[i] - y_mean - slope * (ts[i] - t_mean);
    ss_res += resid * resid;
  }
  DecayFit fit;
  fit.t_start = t_start;
  fit.t_end = t_end;
  fit.rate = -slope;
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.n_points = n;
  return fit;
}

}  // namespace pspe
