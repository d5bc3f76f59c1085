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
#include <span>
#include <string>
#include <vector>

#include "pspe/errors.hpp"
#include "pspe/rng.hpp"

namespace pspe {

inline constexpr double kSimplexTol = 1e-9;

// Tabular episodic fixed-horizon MDP. States, actions and stages are
// 0-based everywhere, including all serialized forms. Rewards are Gaussian
// around mean_reward with per-(s,a) standard deviation reward_noise; a
// noise of zero makes the reward deterministic.
//
// Instances are treated as immutable after construction and may be shared
// freely across threads.
struct TabularMdp {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  std::vector<double> initial_dist;  // [s]
  std::vector<double> transition;    // [s][a][s'] flattened, rows sum to 1
  std::vector<double> mean_reward;   // [s][a]
  std::vector<double> reward_noise;  // [s][a] Gaussian stddev, >= 0

  int sa(int s, int a) const { return s * num_actions + a; }

  std::span<const double> transition_row(int s, int a) const {
    return {transition.data() + static_cast<std::size_t>(sa(s, a)) * num_states,
            static_cast<std::size_t>(num_states)};
  }
  double reward(int s, int a) const { return mean_reward[sa(s, a)]; }
  double noise(int s, int a) const { return reward_noise[sa(s, a)]; }
};

// Deterministic policy: one action per (state, stage).
struct Policy {
  int num_states = 0;
  int horizon = 0;
  std::vector<int> actions;  // [s][h] flattened

  static Policy filled(int num_states, int horizon, int action) {
    Policy p;
    p.num_states = num_states;
    p.horizon = horizon;
    p.actions.assign(static_cast<std::size_t>(num_states) * horizon, action);
    return p;
  }

  int at(int s, int h) const { return actions[s * horizon + h]; }
  int& at(int s, int h) { return actions[s * horizon + h]; }

  bool operator==(const Policy&) const = default;
};

struct Step {
  int state = 0;
  int action = 0;
  double reward = 0.0;
  int next_state = 0;

  bool operator==(const Step&) const = default;
};

// One episode of interaction; exactly horizon steps when produced by
// simulate_episode.
struct Trajectory {
  std::int64_t episode = 0;
  std::vector<Step> steps;

  bool operator==(const Trajectory&) const = default;
};

// Q and V tables for one evaluated policy. Layouts are [h][s][a] and
// [h][s]; stage horizon-1 holds the last-step values (the implicit
// terminal value beyond the horizon is zero).
struct ValueTable {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  std::vector<double> q;
  std::vector<double> v;

  double q_at(int s, int a, int h) const {
    return q[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
  }
  double v_at(int s, int h) const {
    return v[static_cast<std::size_t>(h) * num_states + s];
  }
};

namespace detail {

inline bool is_probability_row(std::span<const double> row) {
  double sum = 0.0;
  for (double p : row) {
    if (!(p >= 0.0) || !std::isfinite(p)) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= kSimplexTol;
}

// Value of `policy` from every state at stage 0, written into `values`
// (size num_states). `scratch` is reused between calls.
inline void policy_values_into(const TabularMdp& mdp, const Policy& policy,
                               std::vector<double>& values,
                               std::vector<double>& scratch) {
  const int S = mdp.num_states;
  values.assign(S, 0.0);
  scratch.assign(S, 0.0);
  for (int h = mdp.horizon - 1; h >= 0; --h) {
    scratch.swap(values);
    for (int s = 0; s < S; ++s) {
      const int a = policy.at(s, h);
      const std::span<const double> row = mdp.transition_row(s, a);
      double value = mdp.reward(s, a);
      for (int s2 = 0; s2 < S; ++s2) value += row[s2] * scratch[s2];
      values[s] = value;
    }
  }
}

inline void check_policy_shape(const TabularMdp& mdp, const Policy& policy) {
  if (policy.num_states != mdp.num_states || policy.horizon != mdp.horizon ||
      policy.actions.size() !=
          static_cast<std::size_t>(mdp.num_states) * mdp.horizon) {
    throw InvalidShape("policy shape does not match MDP dimensions");
  }
  for (int a : policy.actions) {
    if (a < 0 || a >= mdp.num_actions)
      throw IndexOutOfRange("policy action out of range");
  }
}

}  // namespace detail

// Checks every TabularMdp invariant and returns the instance unchanged.
// Throws InvalidShape on dimension mismatches and InvalidDistribution when
// a row of the transition kernel or the initial distribution fails the
// simplex check.
inline TabularMdp validate_mdp(TabularMdp mdp) {
  const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
  if (S < 1 || A < 1 || H < 1)
    throw InvalidShape("num_states, num_actions and horizon must be >= 1");
  const std::size_t sa = static_cast<std::size_t>(S) * A;
  if (mdp.initial_dist.size() != static_cast<std::size_t>(S))
    throw InvalidShape("initial_dist must have num_states entries");
  if (mdp.transition.size() != sa * S)
    throw InvalidShape("transition must have S*A*S entries");
  if (mdp.mean_reward.size() != sa)
    throw InvalidShape("mean_reward must have S*A entries");
  if (mdp.reward_noise.size() != sa)
    throw InvalidShape("reward_noise must have S*A entries");
  if (!detail::is_probability_row(mdp.initial_dist))
    throw InvalidDistribution("initial_dist is not a probability vector");
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      if (!detail::is_probability_row(mdp.transition_row(s, a)))
        throw InvalidDistribution("transition row (" + std::to_string(s) +
                                  "," + std::to_string(a) +
                                  ") is not a probability vector");
  for (double r : mdp.mean_reward)
    if (!std::isfinite(r)) throw InvalidDistribution("mean_reward not finite");
  for (double n : mdp.reward_noise)
    if (!(n >= 0.0) || !std::isfinite(n))
      throw InvalidDistribution("reward_noise must be finite and >= 0");
  return mdp;
}

// Exact policy evaluation by backward recursion:
//   Q(s,a,h) = mean_reward(s,a) + sum_s' P(s'|s,a) V(s',h+1),  V(.,H) = 0,
//   V(s,h)   = Q(s, policy(s,h), h).
inline ValueTable evaluate_policy(const TabularMdp& mdp, const Policy& policy) {
  detail::check_policy_shape(mdp, policy);
  const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
  ValueTable out;
  out.num_states = S;
  out.num_actions = A;
  out.horizon = H;
  out.q.assign(static_cast<std::size_t>(S) * A * H, 0.0);
  out.v.assign(static_cast<std::size_t>(S) * H, 0.0);
  for (int h = H - 1; h >= 0; --h) {
    const double* next = (h == H - 1) ? nullptr : out.v.data() + (h + 1) * S;
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const std::span<const double> row = mdp.transition_row(s, a);
        double q = mdp.reward(s, a);
        if (next != nullptr)
          for (int s2 = 0; s2 < S; ++s2) q += row[s2] * next[s2];
        out.q[(static_cast<std::size_t>(h) * S + s) * A + a] = q;
      }
      out.v[static_cast<std::size_t>(h) * S + s] =
          out.q[(static_cast<std::size_t>(h) * S + s) * A + policy.at(s, h)];
    }
  }
  return out;
}

// Expected total episode reward of a policy under the initial distribution.
inline double mean_episodic_reward(const TabularMdp& mdp, const Policy& policy) {
  detail::check_policy_shape(mdp, policy);
  std::vector<double> values, scratch;
  detail::policy_values_into(mdp, policy, values, scratch);
  double out = 0.0;
  for (int s = 0; s < mdp.num_states; ++s)
    out += mdp.initial_dist[s] * values[s];
  return out;
}

// Rolls out one episode of the policy on the MDP. The start state follows
// initial_dist, rewards are Gaussian around the mean, and transitions
// follow the kernel. Consumes only the caller-owned RNG.
inline Trajectory simulate_episode(const TabularMdp& mdp, const Policy& policy,
                                   Rng& rng, std::int64_t episode = 0) {
  detail::check_policy_shape(mdp, policy);
  Trajectory traj;
  traj.episode = episode;
  traj.steps.reserve(mdp.horizon);
  int s = sample_categorical(mdp.initial_dist, rng);
  for (int h = 0; h < mdp.horizon; ++h) {
    const int a = policy.at(s, h);
    const double noise = mdp.noise(s, a);
    double r = mdp.reward(s, a);
    if (noise > 0.0) r += noise * draw_normal(rng, 0.0, 1.0);
    const int s2 = sample_categorical(mdp.transition_row(s, a), rng);
    traj.steps.push_back({s, a, r, s2});
    s = s2;
  }
  return traj;
}

}  // namespace pspe
