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

#pragma once

// Command implementations behind the hieragent CLI: ingestion, batched
// rollouts with trace and metrics output, objective evaluation of a trace,
// context-growth reports and trace replay.

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hieragent/objective.h"
#include "hieragent/rollout.h"
#include "hieragent/trace.h"

namespace hieragent {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfig = 2,
  kExitIngest = 3,
  kExitRollout = 4,
  kExitReplayMismatch = 5,
};

inline constexpr const char* kOutputDirEnv = "HIERAGENT_OUTPUT_DIR";
inline constexpr const char* kJobsEnv = "HIERAGENT_JOBS";
inline constexpr const char* kTraceFileName = "trace.jsonl";
inline constexpr const char* kMetricsFileName = "metrics.json";
inline constexpr const char* kConfigFileName = "config.json";

// Maps an exception thrown by the commands below to its exit code.
int exit_code_for(const std::exception& e);

IngestSummary run_ingest(const std::string& corpus_path,
                         const std::string& out_index_path,
                         std::size_t chunk_size, std::ostream& log);

// Heuristic policy when policy_path is empty, otherwise the scripted one.
std::shared_ptr<const Policy> load_policy(const std::string& policy_path);

struct RolloutOutputs {
  std::string trace;    // one line per (question, rollout)
  std::string metrics;  // pretty-printed JSON document
  std::size_t questions = 0;
  std::size_t groups = 0;
};

// Runs k_rollouts rollouts per question on up to `jobs` threads. Output is
// independent of `jobs`. Errors surface as RolloutError naming the question.
RolloutOutputs execute_rollouts(const RunConfig& config, const Corpus& corpus,
                                std::shared_ptr<const Policy> policy,
                                const std::vector<QuestionRecord>& questions,
                                std::size_t jobs);

// Loads inputs named by the config, runs them, writes trace, metrics and the
// effective config into output_dir.
RolloutOutputs run_rollout_command(const RunConfig& config, std::size_t jobs,
                                   std::ostream& log);

// Per-question rewards, advantages and surrogate sums for a trace file.
// Questions with fewer than two rollouts are listed under "skipped".
nlohmann::ordered_json objective_report(const std::vector<TraceRecord>& trace,
                                        const HyperParams& hp);
nlohmann::ordered_json run_objective_command(const std::string& trace_path,
                                             const HyperParams& hp,
                                             const std::string& out_path,
                                             std::ostream& log);

struct ComplexityGrid {
  std::vector<std::size_t> hops{1, 2, 3, 4, 5, 6};
  std::vector<std::size_t> top_ks{3, 10, 20, 30};
  std::size_t doc_len = 2000;
  std::size_t res_len = 50;
  std::size_t task_len = 12;
  std::size_t chunk_size = kDefaultChunkSize;
};

struct ComplexityRow {
  Mode mode = Mode::Hierarchical;
  std::size_t hops = 0;
  std::size_t top_k = 0;
  TokenBudgetReport budget;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_abs_residual = 0.0;
};

// Ordinary least squares; throws PreconditionError for fewer than two
// distinct x values.
LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

struct ComplexityFit {
  std::size_t top_k = 0;
  LineFit planner;     // peak planner tokens vs hops
  LineFit monolithic;  // peak monolithic tokens vs hops
  std::size_t executor_min = 0;
  std::size_t executor_max = 0;
};

struct ComplexityReport {
  ComplexityGrid grid;
  std::size_t per_step_overhead = 0;  // tag tokens added per closed plan step
  std::vector<ComplexityRow> rows;
  std::vector<ComplexityFit> fits;
};

ComplexityReport complexity_report(const ComplexityGrid& grid,
                                   const RolloutConfig& base);
std::string format_complexity_table(const ComplexityReport& report);
nlohmann::ordered_json complexity_to_json(const ComplexityReport& report);

struct ReplayResult {
  bool trace_matches = false;
  bool metrics_matches = false;
  std::size_t first_mismatch_line = 0;  // 1-based; 0 when traces match
  bool ok() const { return trace_matches && metrics_matches; }
};

// Re-runs the config and compares the regenerated trace (and metrics, when
// `metrics_path` is non-empty) byte for byte.
ReplayResult run_replay_command(const RunConfig& config,
                                const std::string& trace_path,
                                const std::string& metrics_path,
                                std::size_t jobs, std::ostream& log);

}  // namespace hieragent
