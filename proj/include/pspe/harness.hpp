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

#include <atomic>
#include <charconv>
#include <cstdint>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "pspe/agents.hpp"
#include "pspe/envs.hpp"
#include "pspe/io.hpp"
#include "pspe/metrics.hpp"
#include "pspe/stats.hpp"

namespace pspe {

struct EnvSpec {
  enum class Kind { Chain, File };
  Kind kind = Kind::Chain;
  int chain_n = 10;
  double chain_left_reward = 1e-3;
  double chain_right_reward = 1.0;
  std::string path;
};

struct PracticeSpec {
  std::vector<int> t_practice_grid = {0, 50, 100, 150, 200, 250,
                                      300, 350, 400, 450, 500};
  int t_eval = 500;
};

// Full experiment description; serialized as JSON for the CLI --config
// flag. Unknown keys are rejected on load.
struct ExperimentConfig {
  EnvSpec env{};
  std::vector<AgentConfig> agents;
  int episodes = 1000;
  int trials = 50;
  int eval_samples = 1000;
  int metrics_every = 10;
  std::uint64_t master_seed = 1;
  int workers = 0;  // 0 = hardware concurrency
  PracticeSpec practice{};
  std::string out = "results";
  PriorConfig prior{};

  void validate() const {
    if (agents.empty()) throw InvalidConfig("agents must be non-empty");
    for (const AgentConfig& agent : agents) agent.validate();
    if (episodes < 1) throw InvalidConfig("episodes must be >= 1");
    if (trials < 1) throw InvalidConfig("trials must be >= 1");
    if (eval_samples < 1) throw InvalidConfig("eval_samples must be >= 1");
    if (metrics_every < 1) throw InvalidConfig("metrics_every must be >= 1");
    if (workers < 0) throw InvalidConfig("workers must be >= 0");
    if (env.kind == EnvSpec::Kind::Chain && env.chain_n < 2)
      throw InvalidConfig("chain length must be >= 2");
    if (env.kind == EnvSpec::Kind::File && env.path.empty())
      throw InvalidConfig("env file path must be non-empty");
  }

  void validate_practice() const {
    validate();
    if (practice.t_practice_grid.empty())
      throw InvalidConfig("practice grid must be non-empty");
    for (int t : practice.t_practice_grid)
      if (t < 0) throw InvalidConfig("t_practice entries must be >= 0");
    if (practice.t_eval < 1) throw InvalidConfig("t_eval must be >= 1");
  }
};

inline std::vector<AgentConfig> default_agent_grid() {
  return {AgentConfig::pspe(0.0),  AgentConfig::pspe(0.25),
          AgentConfig::pspe(0.5),  AgentConfig::pspe(0.75),
          AgentConfig::psrl(),     AgentConfig::random_explorer()};
}

inline TabularMdp make_env(const EnvSpec& env) {
  if (env.kind == EnvSpec::Kind::Chain)
    return make_stochastic_chain(env.chain_n, env.chain_left_reward,
                                 env.chain_right_reward);
  return load_mdp(env.path);
}

// Shortest round-trip decimal form; keeps CSV output byte-stable.
inline std::string fmt_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace detail {

inline constexpr std::uint64_t kPracticeSwitchStream = 0x73776974ULL;

inline std::string beta_field(const AgentConfig& agent) {
  return agent.kind == AgentKind::Random ? std::string()
                                         : fmt_double(agent.beta);
}

inline std::string agent_identity(const AgentConfig& agent) {
  return std::string(agent_kind_name(agent.kind)) + ":" + beta_field(agent);
}

// Seeds are keyed by agent identity rather than grid position, so
// removing one agent from the grid never changes another agent's rows.
inline std::uint64_t agent_stream_key(const AgentConfig& agent) {
  return fnv1a64(agent_identity(agent));
}

inline std::string env_identity(const EnvSpec& env) {
  if (env.kind == EnvSpec::Kind::Chain)
    return "chain:" + std::to_string(env.chain_n) + ":" +
           fmt_double(env.chain_left_reward) + ":" +
           fmt_double(env.chain_right_reward);
  return "file:" + env.path;
}

inline std::string run_id_for(const std::string& protocol,
                              const ExperimentConfig& cfg) {
  std::string key = protocol + "|" + env_identity(cfg.env) + "|";
  for (const AgentConfig& agent : cfg.agents) key += agent_identity(agent) + ",";
  key += "|ep=" + std::to_string(cfg.episodes) +
         "|tr=" + std::to_string(cfg.trials) +
         "|es=" + std::to_string(cfg.eval_samples) +
         "|me=" + std::to_string(cfg.metrics_every) +
         "|seed=" + std::to_string(cfg.master_seed);
  if (protocol == "practice") {
    key += "|grid=";
    for (int t : cfg.practice.t_practice_grid) key += std::to_string(t) + ",";
    key += "|te=" + std::to_string(cfg.practice.t_eval);
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(key)));
  return std::string(buf);
}

// Runs fn(0..n_cells-1), possibly across threads. Cells must be
// independent; the first exception is rethrown after all workers join.
template <typename Fn>
void run_cells(int n_cells, int workers, Fn&& fn) {
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (workers > n_cells) workers = n_cells;
  if (workers <= 1) {
    for (int i = 0; i < n_cells; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto work = [&] {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= n_cells) return;
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

inline constexpr const char* kMetricsCsvHeader =
    "run_id,agent_kind,beta,trial,episode,simple_regret,theta,"
    "cum_regret_expected,cum_regret_realized,eval_samples,fallback_count,seed";

inline constexpr const char* kSweepSummaryCsvHeader =
    "agent_kind,beta,episode,trials,simple_regret_mean,simple_regret_se,"
    "theta_mean,theta_se,cum_regret_expected_mean,cum_regret_expected_se";

inline constexpr const char* kPracticeCsvHeader =
    "run_id,agent_kind,beta,trial,t_practice,t_eval,"
    "practice_end_simple_regret,practice_end_theta,eval_cum_regret,"
    "eval_cum_regret_realized,total_cum_regret,eval_samples,fallback_count,"
    "seed";

inline constexpr const char* kPracticeSummaryCsvHeader =
    "agent_kind,beta,t_practice,trials,practice_end_simple_regret_mean,"
    "practice_end_simple_regret_se,eval_cum_regret_mean,eval_cum_regret_se";

struct SweepSummaryEntry {
  int agent_index = 0;
  AgentKind kind = AgentKind::Psrl;
  double beta = 1.0;
  std::int64_t episode = 0;
  int trials = 0;
  MeanSe simple_regret{};
  MeanSe theta{};
  MeanSe cum_regret_expected{};
};

struct SweepResult {
  std::string run_id;
  std::string metrics_csv;
  std::string summary_csv;
  std::string metrics_path;
  std::string summary_path;
  std::vector<SweepSummaryEntry> summary;
};

// Multi-trial, multi-agent sweep. Each (agent, trial) cell runs
// independently with a seed derived from (master_seed, agent identity,
// trial); cells may execute on any number of workers and the output is
// identical either way. Writes <out>.csv and <out>_summary.csv when out is
// non-empty.
inline SweepResult run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const TabularMdp env = make_env(cfg.env);
  const double mu_star =
      initial_value(backward_induction(env), env.initial_dist);
  const int n_agents = static_cast<int>(cfg.agents.size());
  const int n_cells = n_agents * cfg.trials;

  struct CellOut {
    std::uint64_t seed = 0;
    std::vector<MetricsRow> metrics;
    std::vector<double> cum_expected;
    std::vector<double> cum_realized;
  };
  std::vector<CellOut> cells(n_cells);

  RunOptions options;
  options.metrics_every = cfg.metrics_every;
  options.eval_samples = cfg.eval_samples;
  options.record_trajectories = false;
  options.prior = cfg.prior;

  detail::run_cells(n_cells, cfg.workers, [&](int cell) {
    const int agent_index = cell / cfg.trials;
    const int trial = cell % cfg.trials;
    const AgentConfig& agent = cfg.agents[agent_index];
    CellOut& out = cells[cell];
    out.seed = derive_seed(cfg.master_seed,
                           {detail::agent_stream_key(agent),
                            static_cast<std::uint64_t>(trial)});
    RunResult rr = run_agent(env, agent, cfg.episodes, out.seed, options);
    out.metrics = std::move(rr.log.metrics);
    out.cum_expected.reserve(out.metrics.size());
    out.cum_realized.reserve(out.metrics.size());
    double cum_expected = 0.0, cum_realized = 0.0;
    std::size_t next_metric = 0;
    for (const EpisodeRecord& record : rr.log.episodes) {
      cum_expected += std::max(0.0, mu_star - record.expected_value);
      cum_realized += mu_star - record.realized_reward;
      if (next_metric < out.metrics.size() &&
          out.metrics[next_metric].episode == record.episode) {
        out.cum_expected.push_back(cum_expected);
        out.cum_realized.push_back(cum_realized);
        ++next_metric;
      }
    }
  });

  SweepResult result;
  result.run_id = detail::run_id_for("sweep", cfg);
  result.metrics_csv = std::string(kMetricsCsvHeader) + "\n";
  for (int agent_index = 0; agent_index < n_agents; ++agent_index) {
    const AgentConfig& agent = cfg.agents[agent_index];
    const std::string label = agent_kind_name(agent.kind);
    const std::string beta = detail::beta_field(agent);
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const CellOut& cell = cells[agent_index * cfg.trials + trial];
      for (std::size_t j = 0; j < cell.metrics.size(); ++j) {
        const MetricsRow& row = cell.metrics[j];
        result.metrics_csv += result.run_id;
        result.metrics_csv += ',';
        result.metrics_csv += label;
        result.metrics_csv += ',';
        result.metrics_csv += beta;
        result.metrics_csv += ',';
        result.metrics_csv += std::to_string(trial);
        result.metrics_csv += ',';
        result.metrics_csv += std::to_string(row.episode);
        result.metrics_csv += ',';
        result.metrics_csv += fmt_double(row.simple_regret);
        result.metrics_csv += ',';
        result.metrics_csv += fmt_double(row.theta);
        result.metrics_csv += ',';
        result.metrics_csv += fmt_double(cell.cum_expected[j]);
        result.metrics_csv += ',';
        result.metrics_csv += fmt_double(cell.cum_realized[j]);
        result.metrics_csv += ',';
        result.metrics_csv += std::to_string(row.eval_samples);
        result.metrics_csv += ',';
        result.metrics_csv += std::to_string(row.fallback_count);
        result.metrics_csv += ',';
        result.metrics_csv += std::to_string(cell.seed);
        result.metrics_csv += '\n';
      }
    }
  }

  result.summary_csv = std::string(kSweepSummaryCsvHeader) + "\n";
  const std::size_t n_points = cells.empty() ? 0 : cells[0].metrics.size();
  std::vector<double> simple(cfg.trials), theta(cfg.trials), cum(cfg.trials);
  for (int agent_index = 0; agent_index < n_agents; ++agent_index) {
    const AgentConfig& agent = cfg.agents[agent_index];
    for (std::size_t j = 0; j < n_points; ++j) {
      for (int trial = 0; trial < cfg.trials; ++trial) {
        const CellOut& cell = cells[agent_index * cfg.trials + trial];
        simple[trial] = cell.metrics[j].simple_regret;
        theta[trial] = cell.metrics[j].theta;
        cum[trial] = cell.cum_expected[j];
      }
      SweepSummaryEntry entry;
      entry.agent_index = agent_index;
      entry.kind = agent.kind;
      entry.beta = agent.beta;
      entry.episode = cells[agent_index * cfg.trials].metrics[j].episode;
      entry.trials = cfg.trials;
      entry.simple_regret = mean_se(simple);
      entry.theta = mean_se(theta);
      entry.cum_regret_expected = mean_se(cum);
      result.summary.push_back(entry);
      result.summary_csv += std::string(agent_kind_name(agent.kind)) + "," +
                            detail::beta_field(agent) + "," +
                            std::to_string(entry.episode) + "," +
                            std::to_string(cfg.trials) + "," +
                            fmt_double(entry.simple_regret.mean) + "," +
                            fmt_double(entry.simple_regret.se) + "," +
                            fmt_double(entry.theta.mean) + "," +
                            fmt_double(entry.theta.se) + "," +
                            fmt_double(entry.cum_regret_expected.mean) + "," +
                            fmt_double(entry.cum_regret_expected.se) + "\n";
    }
  }

  if (!cfg.out.empty()) {
    result.metrics_path = cfg.out + ".csv";
    result.summary_path = cfg.out + "_summary.csv";
    write_text_file(result.metrics_path, result.metrics_csv);
    write_text_file(result.summary_path, result.summary_csv);
  }
  return result;
}

struct PracticeCellSummary {
  int agent_index = 0;
  AgentKind kind = AgentKind::Psrl;
  double beta = 1.0;
  int t_practice = 0;
  int trials = 0;
  MeanSe practice_end_simple_regret{};
  MeanSe eval_cum_regret{};
};

struct PracticeStudyResult {
  std::string run_id;
  std::string cells_csv;
  std::string summary_csv;
  std::string correlation_csv;
  std::string cells_path;
  std::string summary_path;
  std::string correlation_path;
  double pearson_cell_means = 0.0;
  double spearman_cell_means = 0.0;
  std::vector<PracticeCellSummary> cells;
};

// Practice-then-evaluate study over (beta, t_practice, trial) cells.
// Random-exploration agents in the grid are skipped (the protocol needs a
// posterior-sampling practice agent). The switch-point measurement stream
// is keyed by (trial, t_practice) only, so t_practice = 0 cells agree
// across betas exactly. Emits per-cell rows, per-(beta, t_practice) means,
// and the Pearson/Spearman correlation between practice-end simple regret
// and evaluation cumulative regret across cell means. Writes
// <out>_practice.csv, <out>_practice_summary.csv and
// <out>_practice_correlation.csv when out is non-empty.
inline PracticeStudyResult run_practice_study(const ExperimentConfig& cfg) {
  cfg.validate_practice();
  std::vector<int> agent_indices;
  for (int i = 0; i < static_cast<int>(cfg.agents.size()); ++i)
    if (cfg.agents[i].kind != AgentKind::Random) agent_indices.push_back(i);
  if (agent_indices.empty())
    throw InvalidConfig("practice study needs at least one sampling agent");

  const TabularMdp env = make_env(cfg.env);
  const int n_agents = static_cast<int>(agent_indices.size());
  const int n_grid = static_cast<int>(cfg.practice.t_practice_grid.size());
  const int n_cells = n_agents * n_grid * cfg.trials;

  struct CellOut {
    std::uint64_t seed = 0;
    std::int64_t fallback_count = 0;
    double simple_regret = 0.0;
    double theta = 0.0;
    double eval_cum_regret = 0.0;
    double eval_cum_regret_realized = 0.0;
    double total_cum_regret = 0.0;
  };
  std::vector<CellOut> cells(n_cells);

  RunOptions options;
  options.metrics_every = 0;
  options.eval_samples = cfg.eval_samples;
  options.record_trajectories = false;
  options.prior = cfg.prior;

  detail::run_cells(n_cells, cfg.workers, [&](int cell) {
    const int agent_pos = cell / (n_grid * cfg.trials);
    const int grid_pos = (cell / cfg.trials) % n_grid;
    const int trial = cell % cfg.trials;
    const AgentConfig& agent = cfg.agents[agent_indices[agent_pos]];
    const int t_practice = cfg.practice.t_practice_grid[grid_pos];
    CellOut& out = cells[cell];
    out.seed = derive_seed(cfg.master_seed,
                           {detail::agent_stream_key(agent),
                            static_cast<std::uint64_t>(trial)});
    const std::uint64_t switch_seed =
        derive_seed(cfg.master_seed,
                    {detail::kPracticeSwitchStream,
                     static_cast<std::uint64_t>(trial),
                     static_cast<std::uint64_t>(t_practice)});
    PracticeResult pr =
        practice_then_evaluate(env, agent, t_practice, cfg.practice.t_eval,
                               out.seed, options, switch_seed);
    out.fallback_count = pr.log.fallback_count;
    out.simple_regret = pr.practice_end_simple_regret;
    out.theta = pr.practice_end_theta;
    out.eval_cum_regret = pr.eval_cum_regret;
    out.eval_cum_regret_realized = pr.eval_cum_regret_realized;
    out.total_cum_regret = pr.total_cum_regret;
  });

  PracticeStudyResult result;
  result.run_id = detail::run_id_for("practice", cfg);
  result.cells_csv = std::string(kPracticeCsvHeader) + "\n";
  for (int agent_pos = 0; agent_pos < n_agents; ++agent_pos) {
    const AgentConfig& agent = cfg.agents[agent_indices[agent_pos]];
    for (int grid_pos = 0; grid_pos < n_grid; ++grid_pos) {
      const int t_practice = cfg.practice.t_practice_grid[grid_pos];
      for (int trial = 0; trial < cfg.trials; ++trial) {
        const CellOut& cell =
            cells[(agent_pos * n_grid + grid_pos) * cfg.trials + trial];
        result.cells_csv += result.run_id;
        result.cells_csv += ',';
        result.cells_csv += agent_kind_name(agent.kind);
        result.cells_csv += ',';
        result.cells_csv += detail::beta_field(agent);
        result.cells_csv += ',';
        result.cells_csv += std::to_string(trial);
        result.cells_csv += ',';
        result.cells_csv += std::to_string(t_practice);
        result.cells_csv += ',';
        result.cells_csv += std::to_string(cfg.practice.t_eval);
        result.cells_csv += ',';
        result.cells_csv += fmt_double(cell.simple_regret);
        result.cells_csv += ',';
        result.cells_csv += fmt_double(cell.theta);
        result.cells_csv += ',';
        result.cells_csv += fmt_double(cell.eval_cum_regret);
        result.cells_csv += ',';
        result.cells_csv += fmt_double(cell.eval_cum_regret_realized);
        result.cells_csv += ',';
        result.cells_csv += fmt_double(cell.total_cum_regret);
        result.cells_csv += ',';
        result.cells_csv += std::to_string(cfg.eval_samples);
        result.cells_csv += ',';
        result.cells_csv += std::to_string(cell.fallback_count);
        result.cells_csv += ',';
        result.cells_csv += std::to_string(cell.seed);
        result.cells_csv += '\n';
      }
    }
  }

  result.summary_csv = std::string(kPracticeSummaryCsvHeader) + "\n";
  std::vector<double> simple(cfg.trials), cum(cfg.trials);
  std::vector<double> mean_simple, mean_cum;
  for (int agent_pos = 0; agent_pos < n_agents; ++agent_pos) {
    const AgentConfig& agent = cfg.agents[agent_indices[agent_pos]];
    for (int grid_pos = 0; grid_pos < n_grid; ++grid_pos) {
      for (int trial = 0; trial < cfg.trials; ++trial) {
        const CellOut& cell =
            cells[(agent_pos * n_grid + grid_pos) * cfg.trials + trial];
        simple[trial] = cell.simple_regret;
        cum[trial] = cell.eval_cum_regret;
      }
      PracticeCellSummary summary;
      summary.agent_index = agent_indices[agent_pos];
      summary.kind = agent.kind;
      summary.beta = agent.beta;
      summary.t_practice = cfg.practice.t_practice_grid[grid_pos];
      summary.trials = cfg.trials;
      summary.practice_end_simple_regret = mean_se(simple);
      summary.eval_cum_regret = mean_se(cum);
      result.cells.push_back(summary);
      mean_simple.push_back(summary.practice_end_simple_regret.mean);
      mean_cum.push_back(summary.eval_cum_regret.mean);
      result.summary_csv +=
          std::string(agent_kind_name(agent.kind)) + "," +
          detail::beta_field(agent) + "," +
          std::to_string(summary.t_practice) + "," +
          std::to_string(cfg.trials) + "," +
          fmt_double(summary.practice_end_simple_regret.mean) + "," +
          fmt_double(summary.practice_end_simple_regret.se) + "," +
          fmt_double(summary.eval_cum_regret.mean) + "," +
          fmt_double(summary.eval_cum_regret.se) + "\n";
    }
  }

  result.pearson_cell_means = pearson(mean_simple, mean_cum);
  result.spearman_cell_means = spearman(mean_simple, mean_cum);
  result.correlation_csv = "statistic,value\n";
  result.correlation_csv +=
      "pearson_cell_means," + fmt_double(result.pearson_cell_means) + "\n";
  result.correlation_csv +=
      "spearman_cell_means," + fmt_double(result.spearman_cell_means) + "\n";

  if (!cfg.out.empty()) {
    result.cells_path = cfg.out + "_practice.csv";
    result.summary_path = cfg.out + "_practice_summary.csv";
    result.correlation_path = cfg.out + "_practice_correlation.csv";
    write_text_file(result.cells_path, result.cells_csv);
    write_text_file(result.summary_path, result.summary_csv);
    write_text_file(result.correlation_path, result.correlation_csv);
  }
  return result;
}

// -- Config parsing -----------------------------------------------------

namespace detail {

inline EnvSpec parse_env(const json& j) {
  if (!j.is_object()) throw InvalidConfig("env must be an object");
  check_keys(j, {"kind", "n", "left_reward_mean", "right_reward_mean", "path"},
             "env");
  EnvSpec env;
  const std::string kind = get_field<std::string>(j, "kind", "env");
  if (kind == "chain") {
    env.kind = EnvSpec::Kind::Chain;
    if (j.contains("n")) env.chain_n = j.at("n").get<int>();
    if (j.contains("left_reward_mean"))
      env.chain_left_reward = j.at("left_reward_mean").get<double>();
    if (j.contains("right_reward_mean"))
      env.chain_right_reward = j.at("right_reward_mean").get<double>();
    if (j.contains("path"))
      throw InvalidConfig("env.path is only valid with kind \"file\"");
  } else if (kind == "file") {
    env.kind = EnvSpec::Kind::File;
    env.path = get_field<std::string>(j, "path", "env");
  } else {
    throw InvalidConfig("env.kind must be \"chain\" or \"file\"");
  }
  return env;
}

inline AgentConfig parse_agent(const json& j) {
  if (!j.is_object()) throw InvalidConfig("agent must be an object");
  check_keys(j,
             {"kind", "beta", "max_resamples", "max_rejections", "tie_tol",
              "difference_tol"},
             "agent");
  const std::string kind = get_field<std::string>(j, "kind", "agent");
  AgentConfig agent;
  if (kind == "psrl") {
    agent = AgentConfig::psrl();
  } else if (kind == "pspe") {
    agent = AgentConfig::pspe(get_field<double>(j, "beta", "agent"));
  } else if (kind == "random") {
    agent = AgentConfig::random_explorer();
  } else {
    throw InvalidConfig("agent.kind must be psrl, pspe or random");
  }
  if (kind != "pspe" && j.contains("beta"))
    throw InvalidConfig("agent.beta is only valid for kind \"pspe\"");
  if (j.contains("max_resamples"))
    agent.max_resamples = j.at("max_resamples").get<int>();
  if (j.contains("max_rejections"))
    agent.max_rejections = j.at("max_rejections").get<int>();
  if (j.contains("tie_tol")) agent.tie_tol = j.at("tie_tol").get<double>();
  if (j.contains("difference_tol"))
    agent.difference_tol = j.at("difference_tol").get<double>();
  return agent;
}

inline PriorConfig parse_prior(const json& j) {
  if (!j.is_object()) throw InvalidConfig("prior must be an object");
  check_keys(j,
             {"dirichlet_alpha", "reward_prior_mean", "reward_prior_var",
              "reward_obs_var"},
             "prior");
  PriorConfig prior;
  if (j.contains("dirichlet_alpha"))
    prior.dirichlet_alpha = j.at("dirichlet_alpha").get<double>();
  if (j.contains("reward_prior_mean"))
    prior.reward_prior_mean = j.at("reward_prior_mean").get<double>();
  if (j.contains("reward_prior_var"))
    prior.reward_prior_var = j.at("reward_prior_var").get<double>();
  if (j.contains("reward_obs_var"))
    prior.reward_obs_var = j.at("reward_obs_var").get<double>();
  return prior;
}

inline PracticeSpec parse_practice(const json& j) {
  if (!j.is_object()) throw InvalidConfig("practice must be an object");
  check_keys(j, {"t_practice", "t_eval"}, "practice");
  PracticeSpec practice;
  if (j.contains("t_practice"))
    practice.t_practice_grid = j.at("t_practice").get<std::vector<int>>();
  if (j.contains("t_eval")) practice.t_eval = j.at("t_eval").get<int>();
  return practice;
}

}  // namespace detail

// Parses an experiment config, filling defaults for absent fields and
// rejecting unknown keys. Type errors surface as ParseError, semantic
// problems as InvalidConfig.
inline ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw InvalidConfig("config must be a JSON object");
  detail::check_keys(j,
                     {"env", "agents", "episodes", "trials", "eval_samples",
                      "metrics_every", "seed", "workers", "practice", "out",
                      "prior"},
                     "config");
  ExperimentConfig cfg;
  cfg.agents = default_agent_grid();
  try {
    if (j.contains("env")) cfg.env = detail::parse_env(j.at("env"));
    if (j.contains("agents")) {
      if (!j.at("agents").is_array())
        throw InvalidConfig("agents must be an array");
      cfg.agents.clear();
      for (const json& agent : j.at("agents"))
        cfg.agents.push_back(detail::parse_agent(agent));
    }
    if (j.contains("episodes")) cfg.episodes = j.at("episodes").get<int>();
    if (j.contains("trials")) cfg.trials = j.at("trials").get<int>();
    if (j.contains("eval_samples"))
      cfg.eval_samples = j.at("eval_samples").get<int>();
    if (j.contains("metrics_every"))
      cfg.metrics_every = j.at("metrics_every").get<int>();
    if (j.contains("seed")) cfg.master_seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
    if (j.contains("practice"))
      cfg.practice = detail::parse_practice(j.at("practice"));
    if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
    if (j.contains("prior")) cfg.prior = detail::parse_prior(j.at("prior"));
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad config value: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  return parse_config(json_from_file(path));
}

}  // namespace pspe
