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
//
// Test-only oracles, deliberately written without the library's dynamic
// programming: policy values by complete path enumeration, policy sets by
// odometer enumeration, and closed-form tail probabilities.

#pragma once

#include <cmath>
#include <vector>

#include "pspe/mdp.hpp"

namespace oracle {

// Expected total reward of a policy from a fixed start state, summing
// probability * reward over every complete state path of length horizon.
// Exponential in the horizon; only for tiny instances.
inline double path_enum_value_from(const pspe::TabularMdp& mdp,
                                   const pspe::Policy& policy, int start) {
  struct Walker {
    const pspe::TabularMdp& mdp;
    const pspe::Policy& policy;
    double total = 0.0;

    void walk(int s, int h, double prob, double reward_so_far) {
      if (h == mdp.horizon) {
        total += prob * reward_so_far;
        return;
      }
      const int a = policy.at(s, h);
      const double reward = reward_so_far + mdp.reward(s, a);
      const std::span<const double> row = mdp.transition_row(s, a);
      for (int s2 = 0; s2 < mdp.num_states; ++s2) {
        if (row[s2] <= 0.0) continue;
        walk(s2, h + 1, prob * row[s2], reward);
      }
    }
  };
  Walker walker{mdp, policy};
  walker.walk(start, 0, 1.0, 0.0);
  return walker.total;
}

// rho-weighted path-enumeration value.
inline double path_enum_value(const pspe::TabularMdp& mdp,
                              const pspe::Policy& policy) {
  double total = 0.0;
  for (int s = 0; s < mdp.num_states; ++s) {
    if (mdp.initial_dist[s] <= 0.0) continue;
    total += mdp.initial_dist[s] * path_enum_value_from(mdp, policy, s);
  }
  return total;
}

// All A^(S*H) deterministic policies in odometer order.
inline std::vector<pspe::Policy> enumerate_policies(int num_states,
                                                    int num_actions,
                                                    int horizon) {
  std::vector<pspe::Policy> out;
  pspe::Policy policy = pspe::Policy::filled(num_states, horizon, 0);
  const int coords = num_states * horizon;
  while (true) {
    out.push_back(policy);
    int c = 0;
    while (c < coords) {
      if (++policy.actions[c] < num_actions) break;
      policy.actions[c] = 0;
      ++c;
    }
    if (c == coords) break;
  }
  return out;
}

// P(X >= x) for X ~ Beta(a, 1), whose cdf is x^a.
inline double beta_a1_tail(double a, double x) { return 1.0 - std::pow(x, a); }

inline double mean(const std::vector<double>& xs) {
  double total = 0.0;
  for (double x : xs) total += x;
  return total / static_cast<double>(xs.size());
}

inline double sample_sd(const std::vector<double>& xs) {
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0));
}

}  // namespace oracle
