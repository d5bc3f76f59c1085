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
#include <vector>

#include "pspe/mdp.hpp"
#include "pspe/rng.hpp"

namespace pspe {

// Conjugate prior parameters. Defaults: uniform Dirichlet(1,...,1) over
// each transition row, and a standard normal prior on each mean reward
// with unit observation variance, which gives the closed forms
//   posterior mean = sum_r / (n + 1),  posterior variance = 1 / (n + 1).
struct PriorConfig {
  double dirichlet_alpha = 1.0;
  double reward_prior_mean = 0.0;
  double reward_prior_var = 1.0;
  double reward_obs_var = 1.0;
};

struct RewardMarginal {
  double mean = 0.0;
  double variance = 0.0;
};

struct PosteriorMarginals {
  std::vector<double> concentration;
  double reward_mean = 0.0;
  double reward_variance = 0.0;
};

// Dirichlet-categorical belief over transitions plus Normal-Normal belief
// over mean rewards, per (state, action). The initial distribution is
// known, not learned. A belief is owned by one trial at a time; sampling
// is read-only and may run concurrently on a shared snapshot.
struct MdpBelief {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  std::vector<double> initial_dist;
  PriorConfig prior{};
  std::vector<double> transition_counts;  // [s][a][s'] concentrations
  std::vector<std::int64_t> reward_count;  // [s][a]
  std::vector<double> reward_sum;          // [s][a]

  int sa(int s, int a) const { return s * num_actions + a; }

  std::span<const double> concentration_row(int s, int a) const {
    return {transition_counts.data() +
                static_cast<std::size_t>(sa(s, a)) * num_states,
            static_cast<std::size_t>(num_states)};
  }

  bool operator==(const MdpBelief& other) const {
    return num_states == other.num_states &&
           num_actions == other.num_actions && horizon == other.horizon &&
           initial_dist == other.initial_dist &&
           transition_counts == other.transition_counts &&
           reward_count == other.reward_count &&
           reward_sum == other.reward_sum;
  }
};

namespace detail {

inline RewardMarginal reward_marginal(const MdpBelief& belief, int sa) {
  const PriorConfig& p = belief.prior;
  // Written as a single quotient so the default parameters reduce to
  // exactly sum / (n + 1) and 1 / (n + 1).
  const double numerator = p.reward_prior_mean / p.reward_prior_var +
                           belief.reward_sum[sa] / p.reward_obs_var;
  const double precision =
      1.0 / p.reward_prior_var + belief.reward_count[sa] / p.reward_obs_var;
  return {numerator / precision, 1.0 / precision};
}

inline void check_sa(const MdpBelief& belief, int s, int a) {
  if (s < 0 || s >= belief.num_states || a < 0 || a >= belief.num_actions)
    throw IndexOutOfRange("state or action index out of range");
}

}  // namespace detail

inline MdpBelief init_belief(int num_states, int num_actions, int horizon,
                             std::vector<double> initial_dist,
                             PriorConfig prior = {}) {
  if (num_states < 1 || num_actions < 1 || horizon < 1)
    throw InvalidShape("belief dimensions must be >= 1");
  if (initial_dist.size() != static_cast<std::size_t>(num_states))
    throw InvalidShape("initial_dist must have num_states entries");
  if (!detail::is_probability_row(initial_dist))
    throw InvalidDistribution("initial_dist is not a probability vector");
  if (!(prior.dirichlet_alpha > 0.0) || !(prior.reward_prior_var > 0.0) ||
      !(prior.reward_obs_var > 0.0))
    throw InvalidConfig("prior concentrations and variances must be > 0");
  MdpBelief belief;
  belief.num_states = num_states;
  belief.num_actions = num_actions;
  belief.horizon = horizon;
  belief.initial_dist = std::move(initial_dist);
  belief.prior = prior;
  belief.transition_counts.assign(
      static_cast<std::size_t>(num_states) * num_actions * num_states,
      prior.dirichlet_alpha);
  belief.reward_count.assign(
      static_cast<std::size_t>(num_states) * num_actions, 0);
  belief.reward_sum.assign(static_cast<std::size_t>(num_states) * num_actions,
                           0.0);
  return belief;
}

// Conjugate update with one trajectory: per step the visited transition
// count gains 1 and the reward statistics absorb the observed reward.
// Order-independent up to floating-point summation order.
inline void update_belief(MdpBelief& belief, const Trajectory& traj) {
  for (const Step& step : traj.steps) {
    detail::check_sa(belief, step.state, step.action);
    if (step.next_state < 0 || step.next_state >= belief.num_states)
      throw IndexOutOfRange("next state index out of range");
  }
  for (const Step& step : traj.steps) {
    const int sa = belief.sa(step.state, step.action);
    belief.transition_counts[static_cast<std::size_t>(sa) * belief.num_states +
                             step.next_state] += 1.0;
    belief.reward_count[sa] += 1;
    belief.reward_sum[sa] += step.reward;
  }
}

// Exact posterior parameters for one (state, action).
inline PosteriorMarginals posterior_marginals(const MdpBelief& belief, int s,
                                              int a) {
  detail::check_sa(belief, s, a);
  const std::span<const double> row = belief.concentration_row(s, a);
  const RewardMarginal reward = detail::reward_marginal(belief, belief.sa(s, a));
  return {{row.begin(), row.end()}, reward.mean, reward.variance};
}

// One i.i.d. draw from the belief: each transition row from its Dirichlet,
// each mean reward from its Normal posterior. Rows are visited in (s, a)
// order, transition draws before reward draws. The sampled MDP carries the
// known initial distribution and the likelihood noise level, so it is a
// valid simulation target in its own right.
inline void sample_mdp_into(const MdpBelief& belief, Rng& rng,
                            TabularMdp& out) {
  const int S = belief.num_states, A = belief.num_actions;
  out.num_states = S;
  out.num_actions = A;
  out.horizon = belief.horizon;
  out.initial_dist = belief.initial_dist;
  out.transition.resize(static_cast<std::size_t>(S) * A * S);
  out.mean_reward.resize(static_cast<std::size_t>(S) * A);
  out.reward_noise.assign(static_cast<std::size_t>(S) * A,
                          std::sqrt(belief.prior.reward_obs_var));
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const std::span<const double> conc = belief.concentration_row(s, a);
      double* row = out.transition.data() +
                    (static_cast<std::size_t>(s) * A + a) * S;
      double total = 0.0;
      for (int s2 = 0; s2 < S; ++s2) {
        row[s2] = draw_gamma(rng, conc[s2]);
        total += row[s2];
      }
      if (total > 0.0) {
        for (int s2 = 0; s2 < S; ++s2) row[s2] /= total;
      } else {
        // All gamma draws underflowed (possible for very small
        // concentrations); fall back to the normalized concentrations.
        double conc_total = 0.0;
        for (int s2 = 0; s2 < S; ++s2) conc_total += conc[s2];
        for (int s2 = 0; s2 < S; ++s2) row[s2] = conc[s2] / conc_total;
      }
    }
  }
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const RewardMarginal m = detail::reward_marginal(belief, belief.sa(s, a));
      out.mean_reward[belief.sa(s, a)] =
          draw_normal(rng, m.mean, std::sqrt(m.variance));
    }
  }
}

inline TabularMdp sample_mdp(const MdpBelief& belief, Rng& rng) {
  TabularMdp out;
  sample_mdp_into(belief, rng, out);
  return out;
}

}  // namespace pspe
