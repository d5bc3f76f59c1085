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

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pspe/harness.hpp"

using namespace pspe;

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream stream(text);
  std::string line;
  while (std::getline(stream, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.env.kind = EnvSpec::Kind::Chain;
  cfg.env.chain_n = 3;
  cfg.agents = {AgentConfig::pspe(0.5), AgentConfig::random_explorer()};
  cfg.episodes = 10;
  cfg.trials = 1;
  cfg.eval_samples = 20;
  cfg.metrics_every = 10;
  cfg.master_seed = 7;
  cfg.workers = 1;
  cfg.out.clear();
  return cfg;
}

std::string temp_path(const std::string& name) {
  return "pspe_test_" + name;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

TEST_CASE("sweep row count matches agents x trials x metrics points") {
  const SweepResult result = run_sweep(tiny_config());
  const std::vector<std::string> lines = split_lines(result.metrics_csv);
  REQUIRE(lines.size() == 3);  // header + one row per agent
  CHECK(lines[0] == kMetricsCsvHeader);
}

TEST_CASE("sweep rows parse back into their metrics fields") {
  ExperimentConfig cfg = tiny_config();
  cfg.episodes = 20;
  cfg.trials = 2;
  const SweepResult result = run_sweep(cfg);
  const std::vector<std::string> lines = split_lines(result.metrics_csv);
  REQUIRE(lines.size() == 1 + 2 * 2 * 2);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> fields = split_fields(lines[i]);
    REQUIRE(fields.size() == 12);
    CHECK(fields[0] == result.run_id);
    CHECK((fields[1] == "pspe" || fields[1] == "random"));
    if (fields[1] == "pspe") CHECK(std::stod(fields[2]) == 0.5);
    if (fields[1] == "random") CHECK(fields[2].empty());
    const int trial = std::stoi(fields[3]);
    CHECK(trial >= 0);
    CHECK(trial < 2);
    const long episode = std::stol(fields[4]);
    CHECK((episode == 10 || episode == 20));
    const double simple_regret = std::stod(fields[5]);
    const double theta = std::stod(fields[6]);
    CHECK(theta >= 0.0);
    CHECK(theta <= 1.0);
    CHECK(simple_regret >= -1e-9);
    CHECK(std::stod(fields[7]) >= 0.0);  // cumulative expected regret
    CHECK(std::stoi(fields[9]) == cfg.eval_samples);
    CHECK(std::stol(fields[10]) >= 0);
    CHECK(std::stoull(fields[11]) != 0);
  }
}

TEST_CASE("rerunning a sweep reproduces the bytes, at any worker count") {
  ExperimentConfig cfg = tiny_config();
  cfg.episodes = 20;
  cfg.trials = 3;
  const SweepResult first = run_sweep(cfg);
  const SweepResult again = run_sweep(cfg);
  CHECK(first.metrics_csv == again.metrics_csv);
  CHECK(first.summary_csv == again.summary_csv);

  cfg.workers = 3;
  const SweepResult parallel = run_sweep(cfg);
  CHECK(first.metrics_csv == parallel.metrics_csv);
  CHECK(first.summary_csv == parallel.summary_csv);
}

TEST_CASE("removing one agent leaves the other agents' rows untouched") {
  ExperimentConfig both = tiny_config();
  both.episodes = 20;
  both.trials = 2;
  ExperimentConfig only_random = both;
  only_random.agents = {AgentConfig::random_explorer()};

  const SweepResult full = run_sweep(both);
  const SweepResult solo = run_sweep(only_random);

  std::vector<std::string> random_rows_full;
  for (const std::string& line : split_lines(full.metrics_csv))
    if (line.find(",random,") != std::string::npos)
      random_rows_full.push_back(line.substr(line.find(',')));
  std::vector<std::string> random_rows_solo;
  for (const std::string& line : split_lines(solo.metrics_csv))
    if (line.find(",random,") != std::string::npos)
      random_rows_solo.push_back(line.substr(line.find(',')));
  REQUIRE(!random_rows_full.empty());
  CHECK(random_rows_full == random_rows_solo);
}

TEST_CASE("sweep writes its CSV files when an output prefix is set") {
  ExperimentConfig cfg = tiny_config();
  cfg.out = temp_path("sweep");
  const SweepResult result = run_sweep(cfg);
  CHECK(read_file(result.metrics_path) == result.metrics_csv);
  CHECK(read_file(result.summary_path) == result.summary_csv);
  std::remove(result.metrics_path.c_str());
  std::remove(result.summary_path.c_str());
}

TEST_CASE("summary aggregates across trials with standard errors") {
  ExperimentConfig cfg = tiny_config();
  cfg.trials = 4;
  const SweepResult result = run_sweep(cfg);
  REQUIRE(result.summary.size() == 2);  // one metrics point per agent
  for (const SweepSummaryEntry& entry : result.summary) {
    CHECK(entry.trials == 4);
    CHECK(entry.episode == 10);
    CHECK(entry.simple_regret.se >= 0.0);
    CHECK(entry.theta.mean >= 0.0);
    CHECK(entry.theta.mean <= 1.0);
  }
  const std::vector<std::string> lines = split_lines(result.summary_csv);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == kSweepSummaryCsvHeader);
}

TEST_CASE("practice study emits cells, summaries and correlations") {
  ExperimentConfig cfg = tiny_config();
  cfg.agents = {AgentConfig::pspe(0.5), AgentConfig::psrl(),
                AgentConfig::random_explorer()};
  cfg.practice.t_practice_grid = {0, 10};
  cfg.practice.t_eval = 10;
  cfg.trials = 2;
  const PracticeStudyResult result = run_practice_study(cfg);

  const std::vector<std::string> lines = split_lines(result.cells_csv);
  REQUIRE(lines.size() == 1 + 2 * 2 * 2);  // two sampling agents kept
  CHECK(lines[0] == kPracticeCsvHeader);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> fields = split_fields(lines[i]);
    REQUIRE(fields.size() == 14);
    CHECK((fields[1] == "pspe" || fields[1] == "psrl"));
    CHECK(std::stod(fields[9 - 1]) >= 0.0);  // eval_cum_regret
  }
  CHECK(result.cells.size() == 4);
  CHECK(split_lines(result.correlation_csv).size() == 3);

  // t_practice = 0 cells share the prior belief and the measurement
  // stream, so their simple regret agrees across agents exactly.
  std::vector<std::string> zero_cells;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> fields = split_fields(lines[i]);
    if (fields[4] == "0")
      zero_cells.push_back(fields[3] + ":" + fields[6]);  // trial:regret
  }
  REQUIRE(zero_cells.size() == 4);
  std::sort(zero_cells.begin(), zero_cells.end());
  CHECK(zero_cells[0] == zero_cells[1]);
  CHECK(zero_cells[2] == zero_cells[3]);
}

TEST_CASE("practice study reproduces byte-identically across worker counts") {
  ExperimentConfig cfg = tiny_config();
  cfg.agents = {AgentConfig::pspe(0.5), AgentConfig::pspe(1.0)};
  cfg.practice.t_practice_grid = {0, 5};
  cfg.practice.t_eval = 5;
  cfg.trials = 2;
  const PracticeStudyResult serial = run_practice_study(cfg);
  cfg.workers = 4;
  const PracticeStudyResult parallel = run_practice_study(cfg);
  CHECK(serial.cells_csv == parallel.cells_csv);
  CHECK(serial.summary_csv == parallel.summary_csv);
  CHECK(serial.correlation_csv == parallel.correlation_csv);
}

TEST_CASE("load_config fills defaults for a minimal file") {
  const std::string path = temp_path("minimal.json");
  write_text_file(path, R"({"env": {"kind": "chain", "n": 5}})");
  const ExperimentConfig cfg = load_config(path);
  std::remove(path.c_str());
  CHECK(cfg.env.chain_n == 5);
  CHECK(cfg.trials == 50);
  CHECK(cfg.eval_samples == 1000);
  CHECK(cfg.metrics_every == 10);
  CHECK(cfg.agents.size() == 6);  // beta grid, psrl and random
}

TEST_CASE("load_config rejects malformed and invalid files") {
  const std::string path = temp_path("broken.json");
  write_text_file(path, "{this is not json");
  CHECK_THROWS_AS(load_config(path), ParseError);

  write_text_file(path, R"({"trials": 0})");
  CHECK_THROWS_AS(load_config(path), InvalidConfig);

  write_text_file(path, R"({"trails": 3})");
  CHECK_THROWS_AS(load_config(path), InvalidConfig);

  write_text_file(path, R"({"env": {"kind": "chain"}, "trials": "many"})");
  CHECK_THROWS_AS(load_config(path), ParseError);

  write_text_file(path,
                  R"({"agents": [{"kind": "psrl", "beta": 0.5}]})");
  CHECK_THROWS_AS(load_config(path), InvalidConfig);
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_config("does_not_exist.json"), IoError);
}

TEST_CASE("config round trip covers envs, agents, practice and prior") {
  const std::string path = temp_path("full.json");
  write_text_file(path, R"({
    "env": {"kind": "chain", "n": 4, "left_reward_mean": 0.0},
    "agents": [{"kind": "pspe", "beta": 0.25, "max_resamples": 7},
               {"kind": "random"}],
    "episodes": 30, "trials": 2, "eval_samples": 40, "metrics_every": 15,
    "seed": 99, "workers": 2,
    "practice": {"t_practice": [0, 10], "t_eval": 20},
    "prior": {"dirichlet_alpha": 0.5},
    "out": ""
  })");
  const ExperimentConfig cfg = load_config(path);
  std::remove(path.c_str());
  CHECK(cfg.env.chain_left_reward == 0.0);
  REQUIRE(cfg.agents.size() == 2);
  CHECK(cfg.agents[0].beta == 0.25);
  CHECK(cfg.agents[0].max_resamples == 7);
  CHECK(cfg.agents[1].kind == AgentKind::Random);
  CHECK(cfg.master_seed == 99);
  CHECK(cfg.practice.t_practice_grid == std::vector<int>{0, 10});
  CHECK(cfg.prior.dirichlet_alpha == 0.5);
  CHECK(cfg.out.empty());

  // The config drives a real run.
  const SweepResult result = run_sweep(cfg);
  CHECK(split_lines(result.metrics_csv).size() == 1 + 2 * 2 * 2);
}

TEST_CASE("MDP JSON serialization round-trips and rejects unknown keys") {
  const TabularMdp chain = make_stochastic_chain(4);
  const json j = mdp_to_json(chain);
  const TabularMdp parsed = mdp_from_json(j);
  CHECK(parsed.transition == chain.transition);
  CHECK(parsed.mean_reward == chain.mean_reward);
  CHECK(parsed.reward_noise == chain.reward_noise);
  CHECK(parsed.initial_dist == chain.initial_dist);

  json bad = j;
  bad["extra"] = 1;
  CHECK_THROWS_AS(mdp_from_json(bad), InvalidConfig);

  json missing = j;
  missing.erase("rho");
  CHECK_THROWS_AS(mdp_from_json(missing), ParseError);

  json broken = j;
  broken["P"][0][0][0] = 0.9;  // row no longer sums to one
  CHECK_THROWS_AS(mdp_from_json(broken), InvalidDistribution);
}

TEST_CASE("a file-backed environment feeds the sweep") {
  const std::string path = temp_path("env.json");
  save_mdp(path, make_stochastic_chain(3));
  ExperimentConfig cfg = tiny_config();
  cfg.env.kind = EnvSpec::Kind::File;
  cfg.env.path = path;
  const SweepResult from_file = run_sweep(cfg);
  const SweepResult from_chain = run_sweep(tiny_config());
  std::remove(path.c_str());
  // Same MDP, same seeds: identical rows except the run identifier.
  const auto strip = [](const std::string& csv) {
    std::string out;
    for (const std::string& line : split_lines(csv)) {
      const std::size_t comma = line.find(',');
      out += line.substr(comma == std::string::npos ? 0 : comma) + "\n";
    }
    return out;
  };
  CHECK(strip(from_file.metrics_csv) == strip(from_chain.metrics_csv));
}

TEST_CASE("belief snapshots round-trip through JSON") {
  const TabularMdp chain = make_stochastic_chain(3);
  RunOptions options;
  options.metrics_every = 0;
  options.record_trajectories = false;
  const RunResult rr = run_agent(chain, AgentConfig::pspe(0.5), 25, 31, options);
  const std::string path = temp_path("belief.json");
  save_belief(path, rr.belief);
  const MdpBelief loaded = load_belief(path);
  std::remove(path.c_str());
  CHECK(loaded == rr.belief);
  CHECK(loaded.prior.dirichlet_alpha == rr.belief.prior.dirichlet_alpha);

  json bad = belief_to_json(rr.belief);
  bad["surprise"] = true;
  CHECK_THROWS_AS(belief_from_json(bad), InvalidConfig);
}

TEST_CASE("experiment config validation catches bad values") {
  ExperimentConfig cfg = tiny_config();
  cfg.trials = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  cfg = tiny_config();
  cfg.agents.clear();
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  cfg = tiny_config();
  cfg.env.chain_n = 1;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  cfg = tiny_config();
  cfg.practice.t_practice_grid.clear();
  CHECK_THROWS_AS(cfg.validate_practice(), InvalidConfig);
  cfg = tiny_config();
  cfg.practice.t_eval = 0;
  CHECK_THROWS_AS(cfg.validate_practice(), InvalidConfig);
}
