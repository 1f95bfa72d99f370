// Copyright 2026 The hieragent Authors. All Rights Reserved.
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

// hieragent command-line tool.
//
//   hieragent ingest --corpus-path c.jsonl --out index.json
//   hieragent rollout --config run.json [--mode monolithic] [--jobs 4]
//   hieragent objective --trace out/trace.jsonl [--out objective.json]
//   hieragent complexity-report [--hops 1,2,3] [--top-ks 3,30]
//   hieragent replay --config run.json --trace out/trace.jsonl

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hieragent/driver.h"
#include "hieragent/error.h"

namespace {

using hieragent::RunConfig;

// Flags mirroring RunConfig. Values are applied on top of the config file
// only when given on the command line.
struct RunFlags {
  std::string config_path;
  std::string mode;
  std::size_t top_k = 0;
  std::size_t k_rollouts = 0;
  std::size_t max_planner_steps = 0;
  std::size_t max_executor_search_turns = 0;
  double epsilon = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  std::uint64_t seed = 0;
  std::string corpus_path;
  std::string policy_path;
  std::string questions_path;
  std::string output_dir;
  std::size_t chunk_size = 0;
  std::size_t max_new_tokens = 0;
  std::size_t max_monolithic_searches = 0;
  std::size_t jobs = 1;

  CLI::App* app = nullptr;
};

void add_run_flags(CLI::App* app, RunFlags& f) {
  f.app = app;
  app->add_option("--config", f.config_path, "JSON run config");
  app->add_option("--mode", f.mode, "hierarchical or monolithic")
      ->check(CLI::IsMember({"hierarchical", "monolithic"}));
  app->add_option("--top-k", f.top_k, "documents per search");
  app->add_option("--k-rollouts", f.k_rollouts, "rollouts per question");
  app->add_option("--max-planner-steps", f.max_planner_steps);
  app->add_option("--max-executor-search-turns", f.max_executor_search_turns);
  app->add_option("--epsilon", f.epsilon, "clip range");
  app->add_option("--beta", f.beta, "KL weight");
  app->add_option("--delta", f.delta, "refine reward");
  app->add_option("--seed", f.seed);
  app->add_option("--corpus-path", f.corpus_path, "JSONL corpus or index");
  app->add_option("--policy-path", f.policy_path,
                  "scripted policy JSON; heuristic policy when omitted");
  app->add_option("--questions-path", f.questions_path, "JSONL questions");
  app->add_option("--output-dir", f.output_dir);
  app->add_option("--chunk-size", f.chunk_size);
  app->add_option("--max-new-tokens", f.max_new_tokens);
  app->add_option("--max-monolithic-searches", f.max_monolithic_searches);
  app->add_option("--jobs", f.jobs, "questions processed concurrently")
      ->check(CLI::PositiveNumber);
}

bool given(const RunFlags& f, const std::string& name) {
  return f.app->count(name) > 0;
}

// Precedence: flag, then environment (output_dir, jobs), then config file,
// then built-in defaults.
RunConfig resolve_config(const RunFlags& f, std::size_t& jobs) {
  RunConfig c;
  if (!f.config_path.empty()) c = RunConfig::load(f.config_path);
  if (const char* env = std::getenv(hieragent::kOutputDirEnv); env && *env) {
    c.output_dir = env;
  }
  if (given(f, "--mode")) c.mode = hieragent::mode_from_name(f.mode);
  if (given(f, "--top-k")) c.top_k = f.top_k;
  if (given(f, "--k-rollouts")) c.k_rollouts = f.k_rollouts;
  if (given(f, "--max-planner-steps")) c.max_planner_steps = f.max_planner_steps;
  if (given(f, "--max-executor-search-turns")) {
    c.max_executor_search_turns = f.max_executor_search_turns;
  }
  if (given(f, "--epsilon")) c.epsilon = f.epsilon;
  if (given(f, "--beta")) c.beta = f.beta;
  if (given(f, "--delta")) c.delta = f.delta;
  if (given(f, "--seed")) c.seed = f.seed;
  if (given(f, "--corpus-path")) c.corpus_path = f.corpus_path;
  if (given(f, "--policy-path")) c.policy_path = f.policy_path;
  if (given(f, "--questions-path")) c.questions_path = f.questions_path;
  if (given(f, "--output-dir")) c.output_dir = f.output_dir;
  if (given(f, "--chunk-size")) c.chunk_size = f.chunk_size;
  if (given(f, "--max-new-tokens")) c.max_new_tokens = f.max_new_tokens;
  if (given(f, "--max-monolithic-searches")) {
    c.max_monolithic_searches = f.max_monolithic_searches;
  }

  jobs = 1;
  if (const char* env = std::getenv(hieragent::kJobsEnv); env && *env) {
    try {
      jobs = std::stoul(env);
    } catch (const std::exception&) {
      throw hieragent::ConfigError(std::string(hieragent::kJobsEnv) +
                                   " is not a count: " + env);
    }
    if (jobs == 0) {
      throw hieragent::ConfigError(std::string(hieragent::kJobsEnv) +
                                   " must be >= 1");
    }
  }
  if (given(f, "--jobs")) jobs = f.jobs;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical retrieval agent rollouts and objective tools"};
  app.require_subcommand(1);

  auto* ingest = app.add_subcommand("ingest", "chunk and index a corpus");
  std::string ingest_corpus, ingest_out;
  std::size_t ingest_chunk = hieragent::kDefaultChunkSize;
  ingest->add_option("--corpus-path", ingest_corpus, "JSONL corpus")
      ->required();
  ingest->add_option("--out", ingest_out, "index file to write")->required();
  ingest->add_option("--chunk-size", ingest_chunk);

  auto* rollout = app.add_subcommand("rollout", "run rollouts, write traces");
  RunFlags rollout_flags;
  add_run_flags(rollout, rollout_flags);

  auto* objective =
      app.add_subcommand("objective", "rewards and surrogate for a trace");
  std::string obj_trace, obj_out, obj_config;
  hieragent::HyperParams hp;
  objective->add_option("--trace", obj_trace, "trace.jsonl")->required();
  objective->add_option("--out", obj_out, "report file; stdout when omitted");
  objective->add_option("--config", obj_config,
                        "run config supplying epsilon, beta and delta");
  auto* eps_opt = objective->add_option("--epsilon", hp.epsilon);
  auto* beta_opt = objective->add_option("--beta", hp.beta);
  auto* delta_opt = objective->add_option("--delta", hp.delta);

  auto* complexity = app.add_subcommand(
      "complexity-report", "peak context tokens on a synthetic workload");
  hieragent::ComplexityGrid grid;
  std::string complexity_out;
  complexity->add_option("--hops", grid.hops)->delimiter(',');
  complexity->add_option("--top-ks", grid.top_ks)->delimiter(',');
  complexity->add_option("--doc-len", grid.doc_len);
  complexity->add_option("--res-len", grid.res_len);
  complexity->add_option("--task-len", grid.task_len);
  complexity->add_option("--chunk-size", grid.chunk_size);
  complexity->add_option("--out", complexity_out, "JSON report file");

  auto* replay = app.add_subcommand("replay", "re-run and compare a trace");
  RunFlags replay_flags;
  std::string replay_trace, replay_metrics;
  add_run_flags(replay, replay_flags);
  replay->add_option("--trace", replay_trace, "recorded trace.jsonl")
      ->required();
  replay->add_option("--metrics", replay_metrics, "recorded metrics.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? hieragent::kExitOk : hieragent::kExitUsage;
  }

  try {
    if (*ingest) {
      hieragent::run_ingest(ingest_corpus, ingest_out, ingest_chunk, std::cout);
    } else if (*rollout) {
      std::size_t jobs = 1;
      const RunConfig c = resolve_config(rollout_flags, jobs);
      hieragent::run_rollout_command(c, jobs, std::cout);
    } else if (*objective) {
      hieragent::HyperParams resolved;
      if (!obj_config.empty()) {
        resolved = RunConfig::load(obj_config).hyper_params();
      }
      if (eps_opt->count()) resolved.epsilon = hp.epsilon;
      if (beta_opt->count()) resolved.beta = hp.beta;
      if (delta_opt->count()) resolved.delta = hp.delta;
      hieragent::run_objective_command(obj_trace, resolved, obj_out, std::cout);
    } else if (*complexity) {
      const auto report =
          hieragent::complexity_report(grid, hieragent::RolloutConfig{});
      std::cout << hieragent::format_complexity_table(report);
      if (!complexity_out.empty()) {
        std::ofstream out(complexity_out);
        if (!out) {
          throw hieragent::ConfigError("cannot write " + complexity_out);
        }
        out << hieragent::complexity_to_json(report).dump(2) << '\n';
      }
    } else if (*replay) {
      std::size_t jobs = 1;
      const RunConfig c = resolve_config(replay_flags, jobs);
      const auto r = hieragent::run_replay_command(c, replay_trace,
                                                   replay_metrics, jobs,
                                                   std::cout);
      if (!r.ok()) return hieragent::kExitReplayMismatch;
    }
  } catch (const std::exception& e) {
    std::cerr << "hieragent: " << e.what() << '\n';
    return hieragent::exit_code_for(e);
  }
  return hieragent::kExitOk;
}
