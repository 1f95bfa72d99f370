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

// Hierarchical planner/executor rollouts and the monolithic baseline.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hieragent/context_store.h"
#include "hieragent/policy.h"
#include "hieragent/retrieval.h"
#include "hieragent/tag_protocol.h"

namespace hieragent {

enum class Mode { Hierarchical, Monolithic };

std::string_view mode_name(Mode mode);
Mode mode_from_name(std::string_view name);  // throws ConfigError

inline constexpr std::string_view kDefaultPlannerPreamble =
    "You are the Planner. Break the question into sub-tasks. Emit one "
    "sub-task at a time, or the final answer once the results suffice.";
inline constexpr std::string_view kDefaultExecutorPreamble =
    "You are the Executor. Solve the given sub-task with the search tool, "
    "refine what you find, and conclude with a concise result.";
inline constexpr std::string_view kDefaultMonolithicPreamble =
    "Answer the question. You may search as often as needed, refine the "
    "retrieved documents, and give the final answer.";

struct RolloutConfig {
  std::size_t top_k = 3;
  std::size_t max_planner_steps = 8;
  std::size_t max_executor_search_turns = 4;
  // Search budget of the monolithic baseline.
  std::size_t max_monolithic_searches = 8;
  std::size_t max_new_tokens = 1024;
  std::string planner_preamble{kDefaultPlannerPreamble};
  std::string executor_preamble{kDefaultExecutorPreamble};
  std::string monolithic_preamble{kDefaultMonolithicPreamble};
  std::shared_ptr<const Tokenizer> tokenizer = default_tokenizer();
};

struct TextChunk {
  std::string text;
  Origin origin;
  friend bool operator==(const TextChunk&, const TextChunk&) = default;
};

class Trajectory {
 public:
  explicit Trajectory(Role role, std::optional<int> parent_step = std::nullopt);

  // Rebuilds token and mask arrays from chunks; log-probabilities of agent
  // tokens must be supplied afterwards via set_logprobs.
  static Trajectory from_chunks(Role role, std::optional<int> parent_step,
                                std::vector<TextChunk> chunks);

  void append_agent(const GenResponse& behavior,
                    std::vector<double> current_logprobs,
                    std::vector<double> reference_logprobs);
  void append_observation(std::string text);

  Role role() const { return role_; }
  std::optional<int> parent_step() const { return parent_step_; }
  const std::vector<TextChunk>& chunks() const { return chunks_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<std::uint8_t>& mask() const { return mask_; }
  const std::vector<double>& logprobs_current() const { return lp_current_; }
  const std::vector<double>& logprobs_old() const { return lp_old_; }
  const std::vector<double>& logprobs_reference() const { return lp_reference_; }

  void set_logprobs(std::vector<double> current, std::vector<double> old,
                    std::vector<double> reference);

  std::string text() const;
  TaggedTranscript segments() const;
  std::vector<std::string> agent_turns() const;
  std::size_t masked_token_count() const;

  // Throws IntegrityError naming `label` when array lengths disagree.
  void check_integrity(std::string_view label) const;

 private:
  Role role_;
  std::optional<int> parent_step_;
  std::vector<TextChunk> chunks_;
  std::vector<std::string> tokens_;
  std::vector<std::uint8_t> mask_;
  std::vector<double> lp_current_;
  std::vector<double> lp_old_;
  std::vector<double> lp_reference_;
};

struct TrajectoryGroup {
  std::string query;
  std::vector<std::string> gold_answers;
  Mode mode = Mode::Hierarchical;
  // trajectories[0] is the planner (or the monolithic trajectory); executor
  // trajectories follow in the order their tasks were issued.
  std::vector<Trajectory> trajectories;
  std::optional<std::string> final_answer;
  std::vector<std::string> raw_docs;
  std::optional<StrategicContext> strategic_context;
  TokenBudgetReport budget;
  std::uint64_t seed = 0;

  const Trajectory& root() const { return trajectories.front(); }
  std::size_t executor_count() const;
};

struct RolloutBatch {
  std::string query;
  std::vector<std::string> gold_answers;
  std::vector<TrajectoryGroup> groups;
};

struct ExecutorOutcome {
  Trajectory trajectory;
  std::string result_text;
  std::vector<std::string> raw_docs;
  std::size_t peak_prompt_tokens = 0;
};

// Mutable per-rollout counters, one per role, used to key scripted turns.
struct RolloutCursor {
  int planner_calls = 0;
  int executor_calls = 0;
  int monolithic_calls = 0;
  std::uint64_t seed = 0;
};

ExecutorOutcome run_executor_subloop(const PolicySet& policies,
                                     const Corpus& corpus,
                                     const std::string& task,
                                     const RolloutConfig& config,
                                     RolloutCursor& cursor,
                                     std::optional<int> parent_step = {});

TrajectoryGroup run_hierarchical_rollout(const PolicySet& policies,
                                         const Corpus& corpus,
                                         const std::string& query,
                                         const std::vector<std::string>& gold,
                                         const RolloutConfig& config,
                                         std::uint64_t seed = 0);

// `[preamble]\nQuestion: Q\n` followed by the trajectory so far.
std::string render_monolithic_prompt(std::string_view preamble,
                                     std::string_view query,
                                     std::string_view history);

TrajectoryGroup run_monolithic_rollout(const PolicySet& policies,
                                       const Corpus& corpus,
                                       const std::string& query,
                                       const std::vector<std::string>& gold,
                                       const RolloutConfig& config,
                                       std::uint64_t seed = 0);

TrajectoryGroup run_rollout(Mode mode, const PolicySet& policies,
                            const Corpus& corpus, const std::string& query,
                            const std::vector<std::string>& gold,
                            const RolloutConfig& config, std::uint64_t seed);

// Seed of rollout `index` derived from a base seed.
std::uint64_t rollout_seed(std::uint64_t base_seed, std::size_t index);

// k independent rollouts of the same query. Throws PreconditionError for
// k < 2.
RolloutBatch collect_batch(Mode mode, const PolicySet& policies,
                           const Corpus& corpus, const std::string& query,
                           const std::vector<std::string>& gold, std::size_t k,
                           const RolloutConfig& config,
                           std::uint64_t base_seed = 0);

}  // namespace hieragent
