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

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "pspe/errors.hpp"
#include "pspe/mdp.hpp"
#include "pspe/posterior.hpp"

namespace pspe {

using nlohmann::json;

namespace detail {

// Rejects keys outside the allowed set; catches config typos early.
inline void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                       const std::string& context) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* name : allowed)
      if (key == name) known = true;
    if (!known)
      throw InvalidConfig("unknown key \"" + key + "\" in " + context);
  }
}

template <typename T>
T get_field(const json& obj, const char* key, const std::string& context) {
  if (!obj.contains(key))
    throw ParseError("missing key \"" + std::string(key) + "\" in " + context);
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError("bad value for \"" + std::string(key) + "\" in " +
                     context + ": " + e.what());
  }
}

}  // namespace detail

// MDP file schema, all indices 0-based:
//   {"S": int, "A": int, "H": int, "rho": [S],
//    "P": [S][A][S], "R": [S][A], "noise": [S][A]}
// "noise" may be omitted and defaults to 1 everywhere.
inline json mdp_to_json(const TabularMdp& mdp) {
  const int S = mdp.num_states, A = mdp.num_actions;
  json p = json::array(), r = json::array(), noise = json::array();
  for (int s = 0; s < S; ++s) {
    json pa = json::array(), ra = json::array(), na = json::array();
    for (int a = 0; a < A; ++a) {
      const std::span<const double> row = mdp.transition_row(s, a);
      pa.push_back(json(std::vector<double>(row.begin(), row.end())));
      ra.push_back(mdp.reward(s, a));
      na.push_back(mdp.noise(s, a));
    }
    p.push_back(std::move(pa));
    r.push_back(std::move(ra));
    noise.push_back(std::move(na));
  }
  return json{{"S", S},           {"A", A}, {"H", mdp.horizon},
              {"rho", mdp.initial_dist},    {"P", std::move(p)},
              {"R", std::move(r)},          {"noise", std::move(noise)}};
}

inline TabularMdp mdp_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("MDP document must be a JSON object");
  detail::check_keys(j, {"S", "A", "H", "rho", "P", "R", "noise"}, "MDP");
  TabularMdp mdp;
  mdp.num_states = detail::get_field<int>(j, "S", "MDP");
  mdp.num_actions = detail::get_field<int>(j, "A", "MDP");
  mdp.horizon = detail::get_field<int>(j, "H", "MDP");
  mdp.initial_dist = detail::get_field<std::vector<double>>(j, "rho", "MDP");
  const auto p = detail::get_field<std::vector<std::vector<std::vector<double>>>>(
      j, "P", "MDP");
  const auto r =
      detail::get_field<std::vector<std::vector<double>>>(j, "R", "MDP");
  std::vector<std::vector<double>> noise;
  if (j.contains("noise")) {
    noise = detail::get_field<std::vector<std::vector<double>>>(j, "noise", "MDP");
  } else {
    noise.assign(mdp.num_states, std::vector<double>(mdp.num_actions, 1.0));
  }
  const auto shape_error = [] { throw InvalidShape("ragged MDP arrays"); };
  if (static_cast<int>(p.size()) != mdp.num_states ||
      static_cast<int>(r.size()) != mdp.num_states ||
      static_cast<int>(noise.size()) != mdp.num_states)
    shape_error();
  for (int s = 0; s < mdp.num_states; ++s) {
    if (static_cast<int>(p[s].size()) != mdp.num_actions ||
        static_cast<int>(r[s].size()) != mdp.num_actions ||
        static_cast<int>(noise[s].size()) != mdp.num_actions)
      shape_error();
    for (int a = 0; a < mdp.num_actions; ++a) {
      if (static_cast<int>(p[s][a].size()) != mdp.num_states) shape_error();
      mdp.transition.insert(mdp.transition.end(), p[s][a].begin(),
                            p[s][a].end());
      mdp.mean_reward.push_back(r[s][a]);
      mdp.reward_noise.push_back(noise[s][a]);
    }
  }
  return validate_mdp(std::move(mdp));
}

// Belief snapshot for checkpointing: prior parameters plus all sufficient
// statistics.
inline json belief_to_json(const MdpBelief& belief) {
  return json{{"S", belief.num_states},
              {"A", belief.num_actions},
              {"H", belief.horizon},
              {"rho", belief.initial_dist},
              {"prior",
               {{"dirichlet_alpha", belief.prior.dirichlet_alpha},
                {"reward_prior_mean", belief.prior.reward_prior_mean},
                {"reward_prior_var", belief.prior.reward_prior_var},
                {"reward_obs_var", belief.prior.reward_obs_var}}},
              {"transition_counts", belief.transition_counts},
              {"reward_count", belief.reward_count},
              {"reward_sum", belief.reward_sum}};
}

inline MdpBelief belief_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("belief document must be a JSON object");
  detail::check_keys(j,
                     {"S", "A", "H", "rho", "prior", "transition_counts",
                      "reward_count", "reward_sum"},
                     "belief");
  const json& prior_json = j.contains("prior") ? j.at("prior") : json::object();
  detail::check_keys(prior_json,
                     {"dirichlet_alpha", "reward_prior_mean",
                      "reward_prior_var", "reward_obs_var"},
                     "belief.prior");
  PriorConfig prior;
  if (prior_json.contains("dirichlet_alpha"))
    prior.dirichlet_alpha = prior_json.at("dirichlet_alpha").get<double>();
  if (prior_json.contains("reward_prior_mean"))
    prior.reward_prior_mean = prior_json.at("reward_prior_mean").get<double>();
  if (prior_json.contains("reward_prior_var"))
    prior.reward_prior_var = prior_json.at("reward_prior_var").get<double>();
  if (prior_json.contains("reward_obs_var"))
    prior.reward_obs_var = prior_json.at("reward_obs_var").get<double>();

  MdpBelief belief = init_belief(
      detail::get_field<int>(j, "S", "belief"),
      detail::get_field<int>(j, "A", "belief"),
      detail::get_field<int>(j, "H", "belief"),
      detail::get_field<std::vector<double>>(j, "rho", "belief"), prior);
  auto counts =
      detail::get_field<std::vector<double>>(j, "transition_counts", "belief");
  auto reward_count =
      detail::get_field<std::vector<std::int64_t>>(j, "reward_count", "belief");
  auto reward_sum =
      detail::get_field<std::vector<double>>(j, "reward_sum", "belief");
  if (counts.size() != belief.transition_counts.size() ||
      reward_count.size() != belief.reward_count.size() ||
      reward_sum.size() != belief.reward_sum.size())
    throw InvalidShape("belief statistics have the wrong size");
  belief.transition_counts = std::move(counts);
  belief.reward_count = std::move(reward_count);
  belief.reward_sum = std::move(reward_sum);
  return belief;
}

inline json json_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw ParseError("invalid JSON in " + path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

inline TabularMdp load_mdp(const std::string& path) {
  return mdp_from_json(json_from_file(path));
}

inline void save_mdp(const std::string& path, const TabularMdp& mdp) {
  write_text_file(path, mdp_to_json(mdp).dump(2) + "\n");
}

inline MdpBelief load_belief(const std::string& path) {
  return belief_from_json(json_from_file(path));
}

inline void save_belief(const std::string& path, const MdpBelief& belief) {
  write_text_file(path, belief_to_json(belief).dump(2) + "\n");
}

}  // namespace pspe
