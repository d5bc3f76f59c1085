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

#include "pspe/mdp.hpp"
#include "pspe/rng.hpp"

namespace pspe {

inline constexpr int kChainLeft = 0;
inline constexpr int kChainRight = 1;

// Stochastic chain of n states with horizon n, starting at state 0.
// Left moves are deterministic; right moves succeed with probability
// 1 - 1/n and slip left otherwise. Both boundary moves clamp (left at
// state 0 stays, a slip at state n-1 falls back to n-2). The only rewarded
// pairs are (0, left) and (n-1, right), each with unit-variance Gaussian
// noise; every other reward is a deterministic zero.
//
// The deterministic optimal start-state value with left_reward_mean = 0 is
// right_reward_mean * (1 - 1/n)^(n-1), attained by going right everywhere.
// The small default left reward is a distractor and drags that figure by
// less than 1e-2.
inline TabularMdp make_stochastic_chain(int n, double left_reward_mean = 1e-3,
                                        double right_reward_mean = 1.0) {
  if (n < 2) throw InvalidShape("stochastic chain needs at least 2 states");
  TabularMdp mdp;
  mdp.num_states = n;
  mdp.num_actions = 2;
  mdp.horizon = n;
  mdp.initial_dist.assign(n, 0.0);
  mdp.initial_dist[0] = 1.0;
  mdp.transition.assign(static_cast<std::size_t>(n) * 2 * n, 0.0);
  mdp.mean_reward.assign(static_cast<std::size_t>(n) * 2, 0.0);
  mdp.reward_noise.assign(static_cast<std::size_t>(n) * 2, 0.0);

  const double slip = 1.0 / n;
  auto p = [&](int s, int a, int s2) -> double& {
    return mdp.transition[(static_cast<std::size_t>(s) * 2 + a) * n + s2];
  };
  for (int s = 0; s < n; ++s) {
    const int left = s > 0 ? s - 1 : 0;
    const int right = s < n - 1 ? s + 1 : n - 1;
    p(s, kChainLeft, left) = 1.0;
    p(s, kChainRight, right) += 1.0 - slip;
    p(s, kChainRight, left) += slip;
  }
  mdp.mean_reward[mdp.sa(0, kChainLeft)] = left_reward_mean;
  mdp.mean_reward[mdp.sa(n - 1, kChainRight)] = right_reward_mean;
  mdp.reward_noise[mdp.sa(0, kChainLeft)] = 1.0;
  mdp.reward_noise[mdp.sa(n - 1, kChainRight)] = 1.0;
  return validate_mdp(std::move(mdp));
}

// Random test fixture: transition rows are Dirichlet(1,...,1) draws, mean
// rewards are uniform in [-reward_spread, reward_spread], the initial
// distribution is uniform, and every reward has unit noise.
inline TabularMdp make_random_mdp(int num_states, int num_actions, int horizon,
                                  Rng& rng, double reward_spread = 1.0) {
  if (num_states < 1 || num_actions < 1 || horizon < 1)
    throw InvalidShape("random MDP dimensions must be >= 1");
  TabularMdp mdp;
  mdp.num_states = num_states;
  mdp.num_actions = num_actions;
  mdp.horizon = horizon;
  mdp.initial_dist.assign(num_states, 1.0 / num_states);
  mdp.transition.resize(static_cast<std::size_t>(num_states) * num_actions *
                        num_states);
  mdp.mean_reward.resize(static_cast<std::size_t>(num_states) * num_actions);
  mdp.reward_noise.assign(static_cast<std::size_t>(num_states) * num_actions,
                          1.0);
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      double* row =
          mdp.transition.data() +
          (static_cast<std::size_t>(s) * num_actions + a) * num_states;
      double total = 0.0;
      for (int s2 = 0; s2 < num_states; ++s2) {
        row[s2] = draw_gamma(rng, 1.0);
        total += row[s2];
      }
      for (int s2 = 0; s2 < num_states; ++s2) row[s2] /= total;
      mdp.mean_reward[mdp.sa(s, a)] =
          reward_spread * (2.0 * draw_uniform(rng) - 1.0);
    }
  }
  return validate_mdp(std::move(mdp));
}

}  // namespace pspe
