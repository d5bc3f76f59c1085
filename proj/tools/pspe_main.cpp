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

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pspe/harness.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string env_kind;
  int chain_n = 0;
  double chain_left = -1.0;
  double chain_right = 0.0;
  std::string env_file;
  std::vector<double> betas;
  bool no_random = false;
  int episodes = 0;
  int trials = 0;
  int eval_samples = 0;
  int metrics_every = 0;
  std::uint64_t seed = 0;
  int workers = -1;
  std::string out;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path,
                  "JSON experiment config; other flags override its fields");
  cmd->add_option("--env", flags.env_kind, "Environment kind: chain or file");
  cmd->add_option("--chain-n", flags.chain_n, "Chain length (and horizon)");
  cmd->add_option("--chain-left-reward", flags.chain_left,
                  "Mean reward of (state 0, left)");
  cmd->add_option("--chain-right-reward", flags.chain_right,
                  "Mean reward of (last state, right)");
  cmd->add_option("--env-file", flags.env_file, "MDP JSON file path");
  cmd->add_option("--beta", flags.betas,
                  "PSPE beta; repeatable, beta 1 runs as PSRL");
  cmd->add_flag("--no-random", flags.no_random,
                "Drop the random-exploration baseline from the grid");
  cmd->add_option("--episodes", flags.episodes, "Episodes per trial");
  cmd->add_option("--trials", flags.trials, "Independent trials per agent");
  cmd->add_option("--eval-samples", flags.eval_samples,
                  "Posterior samples per metrics point");
  cmd->add_option("--metrics-every", flags.metrics_every,
                  "Episodes between metrics points");
  cmd->add_option("--seed", flags.seed, "Master seed");
  cmd->add_option("--workers", flags.workers,
                  "Worker threads (0 = hardware concurrency)");
  cmd->add_option("--out", flags.out,
                  "Output path prefix; empty disables file output");
}

pspe::ExperimentConfig build_config(const CLI::App* cmd,
                                    const CommonFlags& flags) {
  pspe::ExperimentConfig cfg;
  if (!flags.config_path.empty()) cfg = pspe::load_config(flags.config_path);

  if (cmd->count("--env") > 0) {
    if (flags.env_kind == "chain") {
      cfg.env.kind = pspe::EnvSpec::Kind::Chain;
    } else if (flags.env_kind == "file") {
      cfg.env.kind = pspe::EnvSpec::Kind::File;
    } else {
      throw pspe::InvalidConfig("--env must be chain or file");
    }
  }
  if (cmd->count("--chain-n") > 0) cfg.env.chain_n = flags.chain_n;
  if (cmd->count("--chain-left-reward") > 0)
    cfg.env.chain_left_reward = flags.chain_left;
  if (cmd->count("--chain-right-reward") > 0)
    cfg.env.chain_right_reward = flags.chain_right;
  if (cmd->count("--env-file") > 0) {
    cfg.env.kind = pspe::EnvSpec::Kind::File;
    cfg.env.path = flags.env_file;
  }
  if (cmd->count("--beta") > 0) {
    cfg.agents.clear();
    for (double beta : flags.betas) {
      cfg.agents.push_back(beta >= 1.0 ? pspe::AgentConfig::psrl()
                                       : pspe::AgentConfig::pspe(beta));
    }
    if (!flags.no_random)
      cfg.agents.push_back(pspe::AgentConfig::random_explorer());
  } else if (flags.no_random) {
    std::erase_if(cfg.agents, [](const pspe::AgentConfig& agent) {
      return agent.kind == pspe::AgentKind::Random;
    });
  }
  if (cmd->count("--episodes") > 0) cfg.episodes = flags.episodes;
  if (cmd->count("--trials") > 0) cfg.trials = flags.trials;
  if (cmd->count("--eval-samples") > 0) cfg.eval_samples = flags.eval_samples;
  if (cmd->count("--metrics-every") > 0)
    cfg.metrics_every = flags.metrics_every;
  if (cmd->count("--seed") > 0) cfg.master_seed = flags.seed;
  if (cmd->count("--workers") > 0) cfg.workers = flags.workers;
  if (cmd->count("--out") > 0) cfg.out = flags.out;
  return cfg;
}

int run_sweep_command(const CLI::App* cmd, const CommonFlags& flags) {
  pspe::ExperimentConfig cfg = build_config(cmd, flags);
  const pspe::SweepResult result = pspe::run_sweep(cfg);
  std::cout << "run " << result.run_id << ": " << cfg.agents.size()
            << " agents x " << cfg.trials << " trials x " << cfg.episodes
            << " episodes\n";
  if (!result.metrics_path.empty()) {
    std::cout << "wrote " << result.metrics_path << "\n";
    std::cout << "wrote " << result.summary_path << "\n";
  }
  std::cout << "final mean simple regret per agent:\n";
  for (const pspe::SweepSummaryEntry& entry : result.summary) {
    if (entry.episode != cfg.episodes) continue;
    std::cout << "  " << pspe::agent_kind_name(entry.kind);
    if (entry.kind != pspe::AgentKind::Random)
      std::cout << "(beta=" << entry.beta << ")";
    std::cout << ": " << entry.simple_regret.mean << " +/- "
              << entry.simple_regret.se << "\n";
  }
  return 0;
}

int run_practice_command(CLI::App* cmd, const CommonFlags& flags,
                         std::vector<int>& t_practice, int& t_eval) {
  pspe::ExperimentConfig cfg = build_config(cmd, flags);
  if (cmd->count("--t-practice") > 0) cfg.practice.t_practice_grid = t_practice;
  if (cmd->count("--t-eval") > 0) cfg.practice.t_eval = t_eval;
  const pspe::PracticeStudyResult result = pspe::run_practice_study(cfg);
  std::cout << "run " << result.run_id << ": " << result.cells.size()
            << " (beta, t_practice) cells x " << cfg.trials << " trials\n";
  if (!result.cells_path.empty()) {
    std::cout << "wrote " << result.cells_path << "\n";
    std::cout << "wrote " << result.summary_path << "\n";
    std::cout << "wrote " << result.correlation_path << "\n";
  }
  std::cout << "pearson(practice simple regret, eval cumulative regret) = "
            << result.pearson_cell_means << "\n";
  std::cout << "spearman = " << result.spearman_cell_means << "\n";
  return 0;
}

int run_single_command(const CLI::App* cmd, const CommonFlags& flags,
                       const std::string& agent_kind, double beta, int trial) {
  pspe::ExperimentConfig cfg = build_config(cmd, flags);
  pspe::AgentConfig agent;
  if (agent_kind == "psrl") {
    agent = pspe::AgentConfig::psrl();
  } else if (agent_kind == "pspe") {
    agent = pspe::AgentConfig::pspe(beta);
  } else if (agent_kind == "random") {
    agent = pspe::AgentConfig::random_explorer();
  } else {
    throw pspe::InvalidConfig("--agent must be psrl, pspe or random");
  }
  cfg.agents = {agent};
  cfg.trials = trial + 1;
  cfg.validate();

  const pspe::TabularMdp env = pspe::make_env(cfg.env);
  pspe::RunOptions options;
  options.metrics_every = cfg.metrics_every;
  options.eval_samples = cfg.eval_samples;
  options.record_trajectories = false;
  options.prior = cfg.prior;
  const std::uint64_t seed =
      pspe::derive_seed(cfg.master_seed,
                        {pspe::detail::agent_stream_key(agent),
                         static_cast<std::uint64_t>(trial)});
  const pspe::RunResult rr =
      pspe::run_agent(env, agent, cfg.episodes, seed, options);
  std::cout << "agent " << pspe::agent_kind_name(agent.kind) << ", seed "
            << seed << ", " << cfg.episodes << " episodes\n";
  for (const pspe::MetricsRow& row : rr.log.metrics) {
    std::cout << "episode " << row.episode << ": simple_regret "
              << row.simple_regret << ", theta " << row.theta
              << ", fallbacks " << row.fallback_count << "\n";
  }
  if (!cfg.out.empty()) {
    pspe::ExperimentConfig file_cfg = cfg;
    file_cfg.workers = 1;
    const pspe::SweepResult result = pspe::run_sweep(file_cfg);
    std::cout << "wrote " << result.metrics_path << "\n";
  }
  return 0;
}

bool report(const std::string& name, bool ok) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
  return ok;
}

// Brute-force consistency suite: dynamic programming against exhaustive
// policy enumeration, conjugate closed forms against integer tallies, and
// the paired regret estimator against enumerated gap bounds.
int run_oracle_check(std::uint64_t seed, int num_mdps) {
  bool all_ok = true;

  {
    bool ok = true;
    for (int i = 0; i < num_mdps; ++i) {
      pspe::Rng rng(pspe::derive_seed(seed, {0x6f7261636cULL, (std::uint64_t)i}));
      const int S = 1 + pspe::draw_index(rng, 3);
      const int A = 1 + pspe::draw_index(rng, 3);
      const int H = 1 + pspe::draw_index(rng, 3);
      const pspe::TabularMdp mdp = pspe::make_random_mdp(S, A, H, rng);
      const pspe::OptimalActionSets sets = pspe::backward_induction(mdp);
      const pspe::GapSummary gaps = pspe::enumerate_gaps(mdp);
      const double dp_value = pspe::initial_value(sets, mdp.initial_dist);
      if (std::abs(dp_value - gaps.mu_star) > 1e-9) ok = false;
      if (gaps.num_optimal != *sets.policy_count()) ok = false;
    }
    all_ok &= report("planner matches exhaustive policy enumeration", ok);
  }

  {
    bool ok = true;
    pspe::Rng rng(pspe::derive_seed(seed, {0x636f6e6aULL}));
    pspe::MdpBelief belief = pspe::init_belief(3, 2, 4, {1.0, 0.0, 0.0});
    std::vector<std::int64_t> counts(3 * 2 * 3, 0), n(3 * 2, 0);
    std::vector<double> sums(3 * 2, 0.0);
    for (int step = 0; step < 2000; ++step) {
      pspe::Trajectory traj;
      const int s = pspe::draw_index(rng, 3);
      const int a = pspe::draw_index(rng, 2);
      const int s2 = pspe::draw_index(rng, 3);
      const double r = pspe::draw_normal(rng, 0.0, 1.0);
      traj.steps.push_back({s, a, r, s2});
      pspe::update_belief(belief, traj);
      counts[(s * 2 + a) * 3 + s2] += 1;
      n[s * 2 + a] += 1;
      sums[s * 2 + a] += r;
    }
    for (int s = 0; s < 3 && ok; ++s) {
      for (int a = 0; a < 2 && ok; ++a) {
        const pspe::PosteriorMarginals m = pspe::posterior_marginals(belief, s, a);
        for (int s2 = 0; s2 < 3; ++s2)
          if (m.concentration[s2] != 1.0 + counts[(s * 2 + a) * 3 + s2])
            ok = false;
        const double expect_mean = sums[s * 2 + a] / (n[s * 2 + a] + 1);
        const double expect_var = 1.0 / (n[s * 2 + a] + 1);
        if (std::abs(m.reward_mean - expect_mean) > 1e-12) ok = false;
        if (std::abs(m.reward_variance - expect_var) > 1e-12) ok = false;
      }
    }
    all_ok &= report("conjugate posterior matches closed forms", ok);
  }

  {
    bool ok = true;
    for (int n = 2; n <= 20; ++n) {
      const pspe::TabularMdp chain = pspe::make_stochastic_chain(n, 0.0);
      const pspe::Policy right =
          pspe::Policy::filled(n, n, pspe::kChainRight);
      const double value = pspe::mean_episodic_reward(chain, right);
      const double formula = std::pow(1.0 - 1.0 / n, n - 1);
      if (std::abs(value - formula) > 1e-9) ok = false;
    }
    all_ok &= report("chain value matches closed form", ok);
  }

  {
    const pspe::TabularMdp chain = pspe::make_stochastic_chain(3);
    const pspe::GapSummary gaps = pspe::enumerate_gaps(chain);
    pspe::RunOptions options;
    options.metrics_every = 5;
    options.eval_samples = 400;
    options.record_trajectories = false;
    const pspe::RunResult rr =
        pspe::run_agent(chain, pspe::AgentConfig::pspe(0.5), 100,
                        pspe::derive_seed(seed, {0x73616e64ULL}), options);
    bool ok = true;
    for (const pspe::MetricsRow& row : rr.log.metrics)
      if (!pspe::sandwich_check(row, gaps.min_gap, gaps.max_gap)) ok = false;
    all_ok &= report("paired estimator stays inside enumerated gap bounds", ok);
  }

  return all_ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Posterior-sampling exploration for tabular episodic MDPs: PSRL, "
      "PSPE(beta) and random baselines with Monte-Carlo simple-regret "
      "measurement"};
  app.require_subcommand(1);

  CommonFlags sweep_flags;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Run the beta-sweep protocol and emit metrics CSVs");
  add_common_flags(sweep, sweep_flags);

  CommonFlags practice_flags;
  std::vector<int> t_practice;
  int t_eval = 500;
  CLI::App* practice = app.add_subcommand(
      "practice",
      "Run the practice-then-evaluate study and emit correlation CSVs");
  add_common_flags(practice, practice_flags);
  practice->add_option("--t-practice", t_practice,
                       "Practice lengths; repeatable");
  practice->add_option("--t-eval", t_eval, "Evaluation episodes per cell");

  CommonFlags run_flags;
  std::string agent_kind = "psrl";
  double run_beta = 0.5;
  int run_trial = 0;
  CLI::App* run =
      app.add_subcommand("run", "Run a single agent and print its metrics");
  add_common_flags(run, run_flags);
  run->add_option("--agent", agent_kind, "Agent kind: psrl, pspe or random");
  run->add_option("--agent-beta", run_beta, "Beta for --agent pspe");
  run->add_option("--trial", run_trial, "Trial index for seed derivation");

  std::uint64_t oracle_seed = 7;
  int oracle_mdps = 30;
  CLI::App* oracle = app.add_subcommand(
      "oracle-check", "Run the brute-force consistency suite");
  oracle->add_option("--seed", oracle_seed, "Seed for generated instances");
  oracle->add_option("--mdps", oracle_mdps, "Random instances to enumerate");

  try {
    app.parse(argc, argv);
    if (sweep->parsed()) return run_sweep_command(sweep, sweep_flags);
    if (practice->parsed())
      return run_practice_command(practice, practice_flags, t_practice, t_eval);
    if (run->parsed())
      return run_single_command(run, run_flags, agent_kind, run_beta, run_trial);
    if (oracle->parsed()) return run_oracle_check(oracle_seed, oracle_mdps);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const pspe::InvalidConfig& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 1;
  } catch (const pspe::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const pspe::InvalidShape& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 1;
  } catch (const pspe::InvalidDistribution& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
