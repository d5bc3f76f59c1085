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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "pspe/mdp.hpp"
#include "pspe/rng.hpp"

namespace pspe {

inline constexpr double kDefaultTieTol = 1e-9;
inline constexpr std::uint64_t kDefaultPolicyLimit = 1'000'000;
inline constexpr int kDefaultMaxRejections = 64;

// Optimal values of an MDP together with the per-(state, stage) argmax
// action sets. The product of the sets is the full set of optimal
// policies: picking any one action per coordinate yields a policy whose
// value is within tie_tol * horizon of optimal everywhere.
//
// Immutable once built; safe to share across threads.
struct OptimalActionSets {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  double tie_tol = kDefaultTieTol;
  std::vector<double> q;  // [h][s][a] optimal action values
  std::vector<double> v;  // [h][s] optimal values
  // Argmax actions grouped per coordinate c = s * horizon + h, ascending
  // within each group. offsets has S*H + 1 entries.
  std::vector<std::int32_t> items;
  std::vector<std::int32_t> offsets;

  int coords() const { return num_states * horizon; }

  std::span<const std::int32_t> set(int s, int h) const {
    const int c = s * horizon + h;
    return {items.data() + offsets[c],
            static_cast<std::size_t>(offsets[c + 1] - offsets[c])};
  }
  bool contains(int s, int h, int a) const {
    for (std::int32_t x : set(s, h))
      if (x == a) return true;
    return false;
  }

  double q_at(int s, int a, int h) const {
    return q[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
  }
  double v_at(int s, int h) const {
    return v[static_cast<std::size_t>(h) * num_states + s];
  }

  // log2 of the number of optimal policies (product of set sizes).
  double log2_policy_count() const {
    double total = 0.0;
    for (int c = 0; c < coords(); ++c)
      total += std::log2(static_cast<double>(offsets[c + 1] - offsets[c]));
    return total;
  }

  // Exact count when it fits in 64 bits, nullopt otherwise.
  std::optional<std::uint64_t> policy_count() const {
    std::uint64_t count = 1;
    for (int c = 0; c < coords(); ++c) {
      const std::uint64_t size =
          static_cast<std::uint64_t>(offsets[c + 1] - offsets[c]);
      if (count > std::numeric_limits<std::uint64_t>::max() / size)
        return std::nullopt;
      count *= size;
    }
    return count;
  }
};

// Finite-horizon dynamic programming. Fills Q*, V* and the argmax sets
// {a : Q*(s,a,h) >= V*(s,h) - tie_tol}. The _into form reuses the output's
// buffers, which matters when planning thousands of posterior samples.
inline void backward_induction_into(const TabularMdp& mdp, double tie_tol,
                                    OptimalActionSets& out) {
  if (tie_tol < 0.0) throw InvalidConfig("tie_tol must be >= 0");
  const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
  out.num_states = S;
  out.num_actions = A;
  out.horizon = H;
  out.tie_tol = tie_tol;
  out.q.assign(static_cast<std::size_t>(S) * A * H, 0.0);
  out.v.assign(static_cast<std::size_t>(S) * H, 0.0);
  for (int h = H - 1; h >= 0; --h) {
    const double* next = (h == H - 1) ? nullptr : out.v.data() + (h + 1) * S;
    for (int s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      double* qrow = out.q.data() + (static_cast<std::size_t>(h) * S + s) * A;
      for (int a = 0; a < A; ++a) {
        const std::span<const double> row = mdp.transition_row(s, a);
        double q = mdp.reward(s, a);
        if (next != nullptr)
          for (int s2 = 0; s2 < S; ++s2) q += row[s2] * next[s2];
        qrow[a] = q;
        best = std::max(best, q);
      }
      out.v[static_cast<std::size_t>(h) * S + s] = best;
    }
  }
  // Second pass in coordinate order so items stay grouped by c = s*H + h.
  out.offsets.assign(static_cast<std::size_t>(S) * H + 1, 0);
  out.items.clear();
  out.items.reserve(static_cast<std::size_t>(S) * H);
  for (int s = 0; s < S; ++s) {
    for (int h = 0; h < H; ++h) {
      const double cutoff = out.v_at(s, h) - tie_tol;
      for (int a = 0; a < A; ++a)
        if (out.q_at(s, a, h) >= cutoff) out.items.push_back(a);
      out.offsets[s * H + h + 1] = static_cast<std::int32_t>(out.items.size());
    }
  }
}

inline OptimalActionSets backward_induction(const TabularMdp& mdp,
                                            double tie_tol = kDefaultTieTol) {
  OptimalActionSets out;
  backward_induction_into(mdp, tie_tol, out);
  return out;
}

// Rebuilds the action sets of `sets` at a wider tolerance from its stored
// value tables, without re-planning.
inline void widen_sets_into(const OptimalActionSets& sets, double tol,
                            OptimalActionSets& out) {
  if (&out != &sets) {
    out.num_states = sets.num_states;
    out.num_actions = sets.num_actions;
    out.horizon = sets.horizon;
    out.q = sets.q;
    out.v = sets.v;
  }
  out.tie_tol = tol;
  out.offsets.assign(static_cast<std::size_t>(sets.coords()) + 1, 0);
  out.items.clear();
  out.items.reserve(static_cast<std::size_t>(sets.coords()));
  for (int s = 0; s < sets.num_states; ++s) {
    for (int h = 0; h < sets.horizon; ++h) {
      const double cutoff = sets.v_at(s, h) - tol;
      for (int a = 0; a < sets.num_actions; ++a)
        if (sets.q_at(s, a, h) >= cutoff) out.items.push_back(a);
      out.offsets[s * sets.horizon + h + 1] =
          static_cast<std::int32_t>(out.items.size());
    }
  }
}

inline OptimalActionSets widen_sets(const OptimalActionSets& sets, double tol) {
  OptimalActionSets out;
  widen_sets_into(sets, tol, out);
  return out;
}

// rho-weighted optimal start value.
inline double initial_value(const OptimalActionSets& sets,
                            std::span<const double> initial_dist) {
  double out = 0.0;
  for (int s = 0; s < sets.num_states; ++s)
    out += initial_dist[s] * sets.v_at(s, 0);
  return out;
}

// Uniform draw from the optimal-policy product set: each coordinate is
// chosen independently and uniformly from its action set, visiting
// coordinates in (state, stage) order.
inline void sample_optimal_policy_into(const OptimalActionSets& sets, Rng& rng,
                                       Policy& out) {
  out.num_states = sets.num_states;
  out.horizon = sets.horizon;
  out.actions.resize(static_cast<std::size_t>(sets.num_states) * sets.horizon);
  for (int s = 0; s < sets.num_states; ++s) {
    for (int h = 0; h < sets.horizon; ++h) {
      const std::span<const std::int32_t> choices = sets.set(s, h);
      out.at(s, h) = choices.size() == 1
                         ? choices[0]
                         : choices[draw_index(rng, static_cast<int>(choices.size()))];
    }
  }
}

inline Policy sample_optimal_policy(const OptimalActionSets& sets, Rng& rng) {
  Policy out;
  sample_optimal_policy_into(sets, rng, out);
  return out;
}

// Membership test in the optimal-policy product set.
inline bool is_optimal_policy(const OptimalActionSets& sets,
                              const Policy& policy) {
  if (policy.num_states != sets.num_states || policy.horizon != sets.horizon)
    throw InvalidShape("policy shape does not match action sets");
  for (int s = 0; s < sets.num_states; ++s)
    for (int h = 0; h < sets.horizon; ++h)
      if (!sets.contains(s, h, policy.at(s, h))) return false;
  return true;
}

namespace detail {

inline void check_same_dims(const OptimalActionSets& a,
                            const OptimalActionSets& b) {
  if (a.num_states != b.num_states || a.num_actions != b.num_actions ||
      a.horizon != b.horizon)
    throw InvalidShape("action-set dimensions do not match");
}

}  // namespace detail

// True iff the product set of `inner` is contained in that of `outer`,
// which for products reduces to coordinate-wise set inclusion. Equivalent
// to intersection_count(inner, outer) == |inner|.
inline bool product_subset(const OptimalActionSets& inner,
                           const OptimalActionSets& outer) {
  detail::check_same_dims(inner, outer);
  for (int s = 0; s < inner.num_states; ++s) {
    for (int h = 0; h < inner.horizon; ++h) {
      const std::span<const std::int32_t> in = inner.set(s, h);
      const std::span<const std::int32_t> out = outer.set(s, h);
      if (!std::includes(out.begin(), out.end(), in.begin(), in.end()))
        return false;
    }
  }
  return true;
}

// Size of the product-set intersection, computed as the product of
// coordinate-wise intersection sizes; nullopt if it overflows 64 bits.
inline std::optional<std::uint64_t> intersection_count(
    const OptimalActionSets& a, const OptimalActionSets& b) {
  detail::check_same_dims(a, b);
  std::uint64_t count = 1;
  for (int s = 0; s < a.num_states; ++s) {
    for (int h = 0; h < a.horizon; ++h) {
      const std::span<const std::int32_t> lhs = a.set(s, h);
      const std::span<const std::int32_t> rhs = b.set(s, h);
      std::uint64_t common = 0;
      std::size_t i = 0, j = 0;
      while (i < lhs.size() && j < rhs.size()) {
        if (lhs[i] < rhs[j]) {
          ++i;
        } else if (rhs[j] < lhs[i]) {
          ++j;
        } else {
          ++common;
          ++i;
          ++j;
        }
      }
      if (common == 0) return 0;
      if (count > std::numeric_limits<std::uint64_t>::max() / common)
        return std::nullopt;
      count *= common;
    }
  }
  return count;
}

// Draws a policy that is optimal for `tilde` but not for `base`. First
// rejection-samples uniformly from the tilde product set, testing
// membership in base; after max_rejections failures it forces one
// coordinate where tilde escapes base to a uniformly chosen escaping
// action and samples the rest uniformly from tilde. The fallback is close
// to but not exactly uniform over the difference.
//
// Throws EmptyDifference when tilde is contained in base.
inline void sample_policy_from_difference_into(const OptimalActionSets& tilde,
                                               const OptimalActionSets& base,
                                               Rng& rng, int max_rejections,
                                               Policy& out) {
  detail::check_same_dims(tilde, base);
  std::vector<int> escape_coords;
  for (int s = 0; s < tilde.num_states; ++s) {
    for (int h = 0; h < tilde.horizon; ++h) {
      const std::span<const std::int32_t> in = tilde.set(s, h);
      const std::span<const std::int32_t> ref = base.set(s, h);
      if (!std::includes(ref.begin(), ref.end(), in.begin(), in.end()))
        escape_coords.push_back(s * tilde.horizon + h);
    }
  }
  if (escape_coords.empty())
    throw EmptyDifference("optimal-policy sets differ nowhere");

  for (int attempt = 0; attempt < max_rejections; ++attempt) {
    sample_optimal_policy_into(tilde, rng, out);
    if (!is_optimal_policy(base, out)) return;
  }

  const int c =
      escape_coords[draw_index(rng, static_cast<int>(escape_coords.size()))];
  const int cs = c / tilde.horizon, ch = c % tilde.horizon;
  std::vector<std::int32_t> escaping;
  const std::span<const std::int32_t> in = tilde.set(cs, ch);
  const std::span<const std::int32_t> ref = base.set(cs, ch);
  std::set_difference(in.begin(), in.end(), ref.begin(), ref.end(),
                      std::back_inserter(escaping));
  sample_optimal_policy_into(tilde, rng, out);
  out.at(cs, ch) =
      escaping[draw_index(rng, static_cast<int>(escaping.size()))];
}

inline Policy sample_policy_from_difference(
    const OptimalActionSets& tilde, const OptimalActionSets& base, Rng& rng,
    int max_rejections = kDefaultMaxRejections) {
  Policy out;
  sample_policy_from_difference_into(tilde, base, rng, max_rejections, out);
  return out;
}

// Exhaustive policy-gap statistics on small instances.
struct GapSummary {
  double mu_star = 0.0;  // best mean episodic reward over all policies
  double min_gap = 0.0;  // over policies outside the optimal product set
  double max_gap = 0.0;
  std::uint64_t num_optimal = 0;
  std::uint64_t num_policies = 0;
};

// Enumerates every deterministic policy (A^(S*H) of them), evaluates each
// exactly, and reports the extreme gaps mu_star - mu(pi) over policies
// outside the optimal product set. Membership uses backward induction on
// the same MDP at the given tie_tol. Gaps are 0 when every policy is
// optimal.
//
// Throws TooManyPolicies when the policy count exceeds policy_limit.
inline GapSummary enumerate_gaps(const TabularMdp& mdp,
                                 double tie_tol = kDefaultTieTol,
                                 std::uint64_t policy_limit = kDefaultPolicyLimit) {
  const int coords = mdp.num_states * mdp.horizon;
  const double log2_total = coords * std::log2(double(mdp.num_actions));
  if (log2_total > 62.0)
    throw TooManyPolicies("policy count exceeds policy_limit");
  std::uint64_t total = 1;
  for (int c = 0; c < coords; ++c) total *= mdp.num_actions;
  if (total > policy_limit)
    throw TooManyPolicies("policy count exceeds policy_limit");

  const OptimalActionSets sets = backward_induction(mdp, tie_tol);
  std::vector<double> mus(total), values, scratch;
  std::vector<bool> optimal(total);

  Policy policy = Policy::filled(mdp.num_states, mdp.horizon, 0);
  GapSummary out;
  out.num_policies = total;
  for (std::uint64_t i = 0;; ++i) {
    detail::policy_values_into(mdp, policy, values, scratch);
    double mu = 0.0;
    for (int s = 0; s < mdp.num_states; ++s)
      mu += mdp.initial_dist[s] * values[s];
    mus[i] = mu;
    optimal[i] = is_optimal_policy(sets, policy);
    // Odometer increment over the action table.
    int c = 0;
    while (c < coords) {
      if (++policy.actions[c] < mdp.num_actions) break;
      policy.actions[c] = 0;
      ++c;
    }
    if (c == coords) break;
  }

  out.mu_star = *std::max_element(mus.begin(), mus.end());
  double min_gap = std::numeric_limits<double>::infinity();
  double max_gap = -std::numeric_limits<double>::infinity();
  for (std::uint64_t i = 0; i < total; ++i) {
    if (optimal[i]) {
      ++out.num_optimal;
    } else {
      const double gap = out.mu_star - mus[i];
      min_gap = std::min(min_gap, gap);
      max_gap = std::max(max_gap, gap);
    }
  }
  if (out.num_optimal == total) {
    out.min_gap = out.max_gap = 0.0;
  } else {
    out.min_gap = min_gap;
    out.max_gap = max_gap;
  }
  return out;
}

}  // namespace pspe
