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

#include "hieragent/context_store.h"

#include <algorithm>
#include <unordered_map>
#include <utility>

#include "hieragent/error.h"
#include "hieragent/tag_protocol.h"

namespace hieragent {

namespace {

std::string join_lines(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += '\n';
    out += parts[i];
  }
  return out;
}

std::string padded(TagKind kind, std::string_view content) {
  return open_tag(kind) + " " + std::string(content) + " " + close_tag(kind);
}

std::vector<std::string> detagged_tokens(std::string_view text) {
  std::string scrubbed(text);
  for (std::size_t i = 0; i < scrubbed.size();) {
    const std::size_t d = known_delimiter_at(scrubbed, i);
    if (d > 0) {
      std::fill_n(scrubbed.begin() + static_cast<std::ptrdiff_t>(i), d, ' ');
      i += d;
    } else {
      ++i;
    }
  }
  return WhitespaceTokenizer{}.split(scrubbed);
}

std::string window_key(const std::vector<std::string>& tokens, std::size_t at,
                       std::size_t window) {
  std::string key;
  for (std::size_t i = at; i < at + window; ++i) {
    key += tokens[i];
    key += '\x1f';
  }
  return key;
}

}  // namespace

StrategicContext::StrategicContext(std::string query,
                                   std::string system_preamble,
                                   std::size_t max_planner_steps)
    : query_(std::move(query)),
      system_preamble_(std::move(system_preamble)),
      max_planner_steps_(max_planner_steps) {}

bool StrategicContext::has_open_step() const {
  return !steps_.empty() && !steps_.back().closed();
}

std::size_t StrategicContext::closed_steps() const {
  return static_cast<std::size_t>(
      std::count_if(steps_.begin(), steps_.end(),
                    [](const PlanStep& s) { return s.closed(); }));
}

void StrategicContext::append_plan_step(std::string task_text) {
  if (has_open_step()) {
    throw ProtocolViolation("append_plan_step while step " +
                            std::to_string(steps_.size()) + " is still open");
  }
  if (trim(task_text).empty()) {
    throw ProtocolViolation("append_plan_step with empty task text");
  }
  if (steps_.size() >= max_planner_steps_) {
    throw ProtocolViolation("append_plan_step beyond max_planner_steps=" +
                            std::to_string(max_planner_steps_));
  }
  steps_.push_back(PlanStep{std::move(task_text), std::nullopt});
}

void StrategicContext::close_plan_step(std::string result_text) {
  if (!has_open_step()) {
    throw ProtocolViolation("close_plan_step with no open step");
  }
  steps_.back().result_text = std::move(result_text);
}

ExecutionContext::ExecutionContext(std::string task,
                                   std::string system_preamble)
    : task_(std::move(task)), system_preamble_(std::move(system_preamble)) {}

void ExecutionContext::add_agent_turn(std::string agent_text) {
  turns_.push_back(ExecutionTurn{std::move(agent_text), std::nullopt});
}

void ExecutionContext::attach_documents(std::string documents_block) {
  if (turns_.empty() || turns_.back().documents_text.has_value()) {
    throw ProtocolViolation("documents observation without a pending search");
  }
  turns_.back().documents_text = std::move(documents_block);
}

std::string render_plan_step(const PlanStep& step) {
  return padded(TagKind::Task, step.task_text) + "\n" +
         padded(TagKind::Result, step.result_text.value_or(""));
}

std::string render_planner_prompt(const StrategicContext& c) {
  std::vector<std::string> parts{c.system_preamble(), "Question: " + c.query()};
  for (const auto& step : c.steps()) {
    if (step.closed()) parts.push_back(render_plan_step(step));
  }
  return join_lines(parts);
}

std::string render_executor_prompt(const ExecutionContext& c) {
  std::vector<std::string> parts{c.system_preamble(),
                                 padded(TagKind::Task, c.task())};
  for (const auto& turn : c.turns()) {
    parts.push_back(turn.agent_text);
    if (turn.documents_text) parts.push_back(*turn.documents_text);
  }
  return join_lines(parts);
}

std::size_t token_count(std::string_view text, const Tokenizer& tokenizer) {
  return tokenizer.count(text);
}

void TokenBudgetReport::merge(const TokenBudgetReport& other) {
  peak_planner_tokens = std::max(peak_planner_tokens, other.peak_planner_tokens);
  peak_executor_tokens =
      std::max(peak_executor_tokens, other.peak_executor_tokens);
  peak_monolithic_tokens =
      std::max(peak_monolithic_tokens, other.peak_monolithic_tokens);
  if (other.per_hop_planner_tokens.size() > per_hop_planner_tokens.size()) {
    per_hop_planner_tokens = other.per_hop_planner_tokens;
  }
}

IsolationReport isolation_check(const StrategicContext& c,
                                const std::vector<std::string>& raw_docs,
                                std::size_t window) {
  return isolation_check_prompt(render_planner_prompt(c), raw_docs, window);
}

IsolationReport isolation_check_prompt(std::string_view planner_prompt,
                                       const std::vector<std::string>& raw_docs,
                                       std::size_t window) {
  IsolationReport report;
  if (const auto at = planner_prompt.find(open_tag(TagKind::Documents));
      at != std::string_view::npos) {
    report.violations.push_back({IsolationViolation::Kind::DocumentsTag, 0, 0,
                                 0, std::string(open_tag(TagKind::Documents))});
  }
  if (window == 0) return report;

  // First occurrence of every window-sized excerpt across the raw chunks.
  std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> excerpts;
  for (std::size_t d = 0; d < raw_docs.size(); ++d) {
    const auto tokens = detagged_tokens(raw_docs[d]);
    for (std::size_t i = 0; i + window <= tokens.size(); ++i) {
      excerpts.try_emplace(window_key(tokens, i, window), d, i);
    }
  }
  if (excerpts.empty()) return report;

  const auto prompt_tokens = detagged_tokens(planner_prompt);
  std::vector<bool> reported(raw_docs.size(), false);
  for (std::size_t i = 0; i + window <= prompt_tokens.size(); ++i) {
    const auto key = window_key(prompt_tokens, i, window);
    const auto it = excerpts.find(key);
    if (it == excerpts.end() || reported[it->second.first]) continue;
    reported[it->second.first] = true;
    std::string excerpt;
    for (std::size_t j = i; j < i + window; ++j) {
      if (j > i) excerpt += ' ';
      excerpt += prompt_tokens[j];
    }
    report.violations.push_back({IsolationViolation::Kind::RawExcerpt,
                                 it->second.first, it->second.second, i,
                                 std::move(excerpt)});
  }
  return report;
}

}  // namespace hieragent
