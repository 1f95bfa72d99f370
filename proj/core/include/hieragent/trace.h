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

// Run configuration, question files and the line-delimited trace format.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hieragent/objective.h"
#include "hieragent/rollout.h"

namespace hieragent {

struct RunConfig {
  Mode mode = Mode::Hierarchical;
  std::size_t top_k = 3;
  std::size_t k_rollouts = 5;
  std::size_t max_planner_steps = 8;
  std::size_t max_executor_search_turns = 4;
  double epsilon = 0.2;
  double beta = 0.001;
  double delta = 1.0;
  std::uint64_t seed = 0;
  std::string corpus_path;
  std::string policy_path;  // empty selects the heuristic policy
  std::string questions_path;
  std::string output_dir = "out";
  std::size_t chunk_size = kDefaultChunkSize;
  std::size_t max_new_tokens = 1024;
  std::size_t max_monolithic_searches = 8;
  std::string planner_preamble{kDefaultPlannerPreamble};
  std::string executor_preamble{kDefaultExecutorPreamble};
  std::string monolithic_preamble{kDefaultMonolithicPreamble};

  // Throws ConfigError naming the first out-of-range field.
  void validate() const;

  RolloutConfig rollout_config() const;
  HyperParams hyper_params() const;

  nlohmann::ordered_json to_json() const;
  // Missing keys keep their defaults; unknown keys and wrong types throw
  // ConfigError.
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct QuestionRecord {
  std::string id;
  std::string question;
  std::vector<std::string> answers;
};

// One {"id", "question", "answers"} object per line; blank lines skipped.
// Throws ConfigError on malformed lines, duplicate ids or empty answers.
std::vector<QuestionRecord> read_questions_jsonl(std::istream& in);
std::vector<QuestionRecord> read_questions_file(const std::string& path);

struct TraceRecord {
  std::string question_id;
  std::size_t rollout = 0;
  TrajectoryGroup group;
  RewardBreakdown reward;
  std::optional<double> advantage;  // present when the question had k > 1
};

// Single-line JSON rendering, without the trailing newline.
std::string trace_line(const TraceRecord& record);

// Inverse of trace_line. Rebuilds token and mask arrays from the recorded
// chunks and throws IntegrityError if they disagree with the stored ones.
TraceRecord parse_trace_line(std::string_view line);
std::vector<TraceRecord> read_trace(std::istream& in);
std::vector<TraceRecord> read_trace_file(const std::string& path);

nlohmann::ordered_json reward_to_json(const RewardBreakdown& r);
nlohmann::ordered_json budget_to_json(const TokenBudgetReport& b);

}  // namespace hieragent
