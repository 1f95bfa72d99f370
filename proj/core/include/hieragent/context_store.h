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

// Planner strategic context and executor ephemeral context, their prompt
// rendering, and the token accounting used by budget reports.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hieragent/tokenizer.h"

namespace hieragent {

struct PlanStep {
  std::string task_text;
  std::optional<std::string> result_text;

  bool closed() const { return result_text.has_value(); }
};

class StrategicContext {
 public:
  StrategicContext(std::string query, std::string system_preamble,
                   std::size_t max_planner_steps = 8);

  const std::string& query() const { return query_; }
  const std::string& system_preamble() const { return system_preamble_; }
  const std::vector<PlanStep>& steps() const { return steps_; }
  std::size_t max_planner_steps() const { return max_planner_steps_; }
  bool has_open_step() const;
  std::size_t closed_steps() const;

  // Opens a step. Throws ProtocolViolation if a step is already open, the
  // task is blank, or the step budget is exhausted.
  void append_plan_step(std::string task_text);
  // Closes the open step. Throws ProtocolViolation if none is open.
  void close_plan_step(std::string result_text);

 private:
  std::string query_;
  std::string system_preamble_;
  std::size_t max_planner_steps_;
  std::vector<PlanStep> steps_;
};

struct ExecutionTurn {
  std::string agent_text;
  std::optional<std::string> documents_text;
};

class ExecutionContext {
 public:
  ExecutionContext(std::string task, std::string system_preamble);

  const std::string& task() const { return task_; }
  const std::string& system_preamble() const { return system_preamble_; }
  const std::vector<ExecutionTurn>& turns() const { return turns_; }

  void add_agent_turn(std::string agent_text);
  // Attaches an observation to the most recent agent turn.
  void attach_documents(std::string documents_block);

 private:
  std::string task_;
  std::string system_preamble_;
  std::vector<ExecutionTurn> turns_;
};

// preamble, the query, then one `<task> t </task>\n<result> r </result>`
// pair per closed step. Open steps are not rendered.
std::string render_planner_prompt(const StrategicContext& c);

// preamble, `<task> t </task>`, then agent turns and documents blocks in
// the order they happened.
std::string render_executor_prompt(const ExecutionContext& c);

// Rendering of a single closed step, exposed for overhead accounting.
std::string render_plan_step(const PlanStep& step);

std::size_t token_count(std::string_view text,
                        const Tokenizer& tokenizer = WhitespaceTokenizer{});

struct TokenBudgetReport {
  std::size_t peak_planner_tokens = 0;
  std::size_t peak_executor_tokens = 0;
  std::size_t peak_monolithic_tokens = 0;
  std::vector<std::size_t> per_hop_planner_tokens;

  // Peaks combine by max; per-hop series keep the longer of the two.
  void merge(const TokenBudgetReport& other);
  friend bool operator==(const TokenBudgetReport&,
                         const TokenBudgetReport&) = default;
};

inline constexpr std::size_t kIsolationWindowTokens = 30;

struct IsolationViolation {
  enum class Kind { DocumentsTag, RawExcerpt };
  Kind kind;
  std::size_t chunk_index = 0;        // into raw_docs; RawExcerpt only
  std::size_t chunk_token_offset = 0;  // first matching token in the chunk
  std::size_t prompt_token_offset = 0;
  std::string excerpt;
};

struct IsolationReport {
  std::vector<IsolationViolation> violations;
  bool ok() const { return violations.empty(); }
};

// Passes iff the rendered planner prompt carries no `<documents>` tag and no
// run of `window` consecutive tokens copied from any raw chunk. Tag
// delimiters are treated as whitespace on both sides so a chunk glued to a
// tag is still found.
IsolationReport isolation_check(const StrategicContext& c,
                                const std::vector<std::string>& raw_docs,
                                std::size_t window = kIsolationWindowTokens);
IsolationReport isolation_check_prompt(std::string_view planner_prompt,
                                       const std::vector<std::string>& raw_docs,
                                       std::size_t window = kIsolationWindowTokens);

}  // namespace hieragent
