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

#include "hieragent/rollout.h"

#include <algorithm>

#include "hieragent/error.h"
#include "hieragent/tokenizer.h"

namespace hieragent {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// The last Task/Answer (planner) or Search/Result (executor) segment of a
// turn. Generation stops right after the first such closing tag, so a
// well-formed turn has its action last.
const TagSegment* final_action(const TaggedTranscript& t, TagKind a,
                               TagKind b) {
  for (auto it = t.segments.rbegin(); it != t.segments.rend(); ++it) {
    if (it->kind == a || it->kind == b) return &*it;
  }
  return nullptr;
}

// Samples one turn from the behavior policy and scores it under the other
// two snapshots.
void take_turn(const PolicySet& policies, const GenRequest& request,
               Trajectory& trajectory, GenResponse& response) {
  response = policies.old.generate(request);
  auto score = [&](const PolicyHandle& h) {
    return h.shares_implementation(policies.old)
               ? response.logprobs
               : h.score_tokens(request, response.tokens);
  };
  trajectory.append_agent(response, score(policies.current),
                          score(policies.reference));
}

void append_bodies(const SearchResult& r, std::vector<std::string>& out) {
  for (const auto& sc : r.ranked) out.push_back(sc.chunk.body);
}

}  // namespace

std::string_view mode_name(Mode mode) {
  return mode == Mode::Hierarchical ? "hierarchical" : "monolithic";
}

Mode mode_from_name(std::string_view name) {
  if (name == "hierarchical") return Mode::Hierarchical;
  if (name == "monolithic") return Mode::Monolithic;
  throw ConfigError("unknown mode: " + std::string(name));
}

Trajectory::Trajectory(Role role, std::optional<int> parent_step)
    : role_(role), parent_step_(parent_step) {}

Trajectory Trajectory::from_chunks(Role role, std::optional<int> parent_step,
                                   std::vector<TextChunk> chunks) {
  Trajectory t(role, parent_step);
  for (auto& c : chunks) {
    const auto pieces = tokenize_pieces(c.text);
    const std::uint8_t m = c.origin == Origin::Agent ? 1 : 0;
    t.tokens_.insert(t.tokens_.end(), pieces.begin(), pieces.end());
    t.mask_.insert(t.mask_.end(), pieces.size(), m);
    t.chunks_.push_back(std::move(c));
  }
  const std::size_t n = t.tokens_.size();
  t.lp_current_.assign(n, 0.0);
  t.lp_old_.assign(n, 0.0);
  t.lp_reference_.assign(n, 0.0);
  return t;
}

void Trajectory::append_agent(const GenResponse& behavior,
                              std::vector<double> current_logprobs,
                              std::vector<double> reference_logprobs) {
  const std::size_t n = behavior.tokens.size();
  if (behavior.logprobs.size() != n || current_logprobs.size() != n ||
      reference_logprobs.size() != n) {
    throw IntegrityError("agent turn with misaligned log-probabilities");
  }
  chunks_.push_back({behavior.text, Origin::Agent});
  tokens_.insert(tokens_.end(), behavior.tokens.begin(), behavior.tokens.end());
  mask_.insert(mask_.end(), n, 1);
  lp_old_.insert(lp_old_.end(), behavior.logprobs.begin(),
                 behavior.logprobs.end());
  lp_current_.insert(lp_current_.end(), current_logprobs.begin(),
                     current_logprobs.end());
  lp_reference_.insert(lp_reference_.end(), reference_logprobs.begin(),
                       reference_logprobs.end());
}

void Trajectory::append_observation(std::string text) {
  const auto pieces = tokenize_pieces(text);
  tokens_.insert(tokens_.end(), pieces.begin(), pieces.end());
  mask_.insert(mask_.end(), pieces.size(), 0);
  // Observations are not generated; their log-probabilities are never read.
  lp_old_.insert(lp_old_.end(), pieces.size(), 0.0);
  lp_current_.insert(lp_current_.end(), pieces.size(), 0.0);
  lp_reference_.insert(lp_reference_.end(), pieces.size(), 0.0);
  chunks_.push_back({std::move(text), Origin::Environment});
}

void Trajectory::set_logprobs(std::vector<double> current,
                              std::vector<double> old,
                              std::vector<double> reference) {
  lp_current_ = std::move(current);
  lp_old_ = std::move(old);
  lp_reference_ = std::move(reference);
}

std::string Trajectory::text() const {
  std::string out;
  for (const auto& c : chunks_) out += c.text;
  return out;
}

TaggedTranscript Trajectory::segments() const {
  return parse_transcript(text(), transcript_role(role_));
}

std::vector<std::string> Trajectory::agent_turns() const {
  std::vector<std::string> out;
  for (const auto& c : chunks_) {
    if (c.origin == Origin::Agent) out.push_back(c.text);
  }
  return out;
}

std::size_t Trajectory::masked_token_count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), 1));
}

void Trajectory::check_integrity(std::string_view label) const {
  const std::size_t n = tokens_.size();
  if (mask_.size() != n || lp_current_.size() != n || lp_old_.size() != n ||
      lp_reference_.size() != n) {
    throw IntegrityError(
        "trajectory " + std::string(label) + " (" +
        std::string(role_name(role_)) + "): tokens=" + std::to_string(n) +
        " mask=" + std::to_string(mask_.size()) +
        " logprobs_current=" + std::to_string(lp_current_.size()) +
        " logprobs_old=" + std::to_string(lp_old_.size()) +
        " logprobs_reference=" + std::to_string(lp_reference_.size()));
  }
}

std::size_t TrajectoryGroup::executor_count() const {
  return static_cast<std::size_t>(
      std::count_if(trajectories.begin(), trajectories.end(),
                    [](const Trajectory& t) { return t.role() == Role::Executor; }));
}

ExecutorOutcome run_executor_subloop(const PolicySet& policies,
                                     const Corpus& corpus,
                                     const std::string& task,
                                     const RolloutConfig& config,
                                     RolloutCursor& cursor,
                                     std::optional<int> parent_step) {
  ExecutorOutcome out{Trajectory(Role::Executor, parent_step),
                      std::string(kUnknownResult), {}, 0};
  ExecutionContext context(task, config.executor_preamble);
  std::size_t searches = 0;
  for (;;) {
    GenRequest request;
    request.prompt = render_executor_prompt(context);
    request.role = Role::Executor;
    request.stop_tags = {TagKind::Search, TagKind::Result};
    request.max_new_tokens = config.max_new_tokens;
    request.ordinal = cursor.executor_calls++;
    request.sample_seed = cursor.seed;
    out.peak_prompt_tokens = std::max(
        out.peak_prompt_tokens, config.tokenizer->count(request.prompt));

    GenResponse response;
    take_turn(policies, request, out.trajectory, response);
    context.add_agent_turn(response.text);

    const auto turn = parse_transcript(response.text, TranscriptRole::Executor);
    const TagSegment* action = final_action(turn, TagKind::Search, TagKind::Result);
    if (action == nullptr) break;
    if (action->kind == TagKind::Result) {
      out.result_text = trim(action->content);
      break;
    }
    if (searches == config.max_executor_search_turns) break;
    ++searches;
    const SearchResult found = corpus.search(trim(action->content), config.top_k);
    append_bodies(found, out.raw_docs);
    std::string block = format_documents_block(found);
    context.attach_documents(block);
    out.trajectory.append_observation(std::move(block));
  }
  return out;
}

TrajectoryGroup run_hierarchical_rollout(const PolicySet& policies,
                                         const Corpus& corpus,
                                         const std::string& query,
                                         const std::vector<std::string>& gold,
                                         const RolloutConfig& config,
                                         std::uint64_t seed) {
  TrajectoryGroup group;
  group.query = query;
  group.gold_answers = gold;
  group.mode = Mode::Hierarchical;
  group.seed = seed;
  group.trajectories.emplace_back(Role::Planner);

  StrategicContext strategic(query, config.planner_preamble,
                             config.max_planner_steps);
  RolloutCursor cursor;
  cursor.seed = seed;
  std::vector<Trajectory> executors;

  for (;;) {
    GenRequest request;
    request.prompt = render_planner_prompt(strategic);
    request.role = Role::Planner;
    request.stop_tags = {TagKind::Task, TagKind::Answer};
    request.max_new_tokens = config.max_new_tokens;
    request.ordinal = cursor.planner_calls++;
    request.sample_seed = seed;
    group.budget.peak_planner_tokens = std::max(
        group.budget.peak_planner_tokens, config.tokenizer->count(request.prompt));

    GenResponse response;
    take_turn(policies, request, group.trajectories.front(), response);

    const auto turn = parse_transcript(response.text, TranscriptRole::Planner);
    const TagSegment* action = final_action(turn, TagKind::Task, TagKind::Answer);
    if (action == nullptr) break;
    if (action->kind == TagKind::Answer) {
      group.final_answer = trim(action->content);
      break;
    }
    std::string task = trim(action->content);
    if (task.empty() || strategic.steps().size() >= config.max_planner_steps) {
      break;
    }
    const int step = static_cast<int>(strategic.steps().size());
    strategic.append_plan_step(task);
    ExecutorOutcome outcome =
        run_executor_subloop(policies, corpus, task, config, cursor, step);
    strategic.close_plan_step(outcome.result_text);
    group.trajectories.front().append_observation(
        open_tag(TagKind::Result) + " " + outcome.result_text + " " +
        close_tag(TagKind::Result));

    group.budget.peak_executor_tokens =
        std::max(group.budget.peak_executor_tokens, outcome.peak_prompt_tokens);
    group.budget.per_hop_planner_tokens.push_back(
        config.tokenizer->count(render_planner_prompt(strategic)));
    group.raw_docs.insert(group.raw_docs.end(), outcome.raw_docs.begin(),
                          outcome.raw_docs.end());
    executors.push_back(std::move(outcome.trajectory));
  }

  for (auto& e : executors) group.trajectories.push_back(std::move(e));
  group.strategic_context = std::move(strategic);
  return group;
}

std::string render_monolithic_prompt(std::string_view preamble,
                                     std::string_view query,
                                     std::string_view history) {
  std::string out(preamble);
  out += "\nQuestion: ";
  out += query;
  out += '\n';
  out += history;
  return out;
}

TrajectoryGroup run_monolithic_rollout(const PolicySet& policies,
                                       const Corpus& corpus,
                                       const std::string& query,
                                       const std::vector<std::string>& gold,
                                       const RolloutConfig& config,
                                       std::uint64_t seed) {
  TrajectoryGroup group;
  group.query = query;
  group.gold_answers = gold;
  group.mode = Mode::Monolithic;
  group.seed = seed;
  group.trajectories.emplace_back(Role::Monolithic);
  Trajectory& traj = group.trajectories.front();

  RolloutCursor cursor;
  cursor.seed = seed;
  std::size_t searches = 0;
  for (;;) {
    GenRequest request;
    request.prompt =
        render_monolithic_prompt(config.monolithic_preamble, query, traj.text());
    request.role = Role::Monolithic;
    request.stop_tags = {TagKind::Search, TagKind::Answer};
    request.max_new_tokens = config.max_new_tokens;
    request.ordinal = cursor.monolithic_calls++;
    request.sample_seed = seed;
    group.budget.peak_monolithic_tokens =
        std::max(group.budget.peak_monolithic_tokens,
                 config.tokenizer->count(request.prompt));

    GenResponse response;
    take_turn(policies, request, traj, response);

    const auto turn = parse_transcript(response.text, TranscriptRole::Monolithic);
    const TagSegment* action = final_action(turn, TagKind::Search, TagKind::Answer);
    if (action == nullptr) break;
    if (action->kind == TagKind::Answer) {
      group.final_answer = trim(action->content);
      break;
    }
    if (searches == config.max_monolithic_searches) break;
    ++searches;
    const SearchResult found = corpus.search(trim(action->content), config.top_k);
    append_bodies(found, group.raw_docs);
    traj.append_observation(format_documents_block(found));
  }
  return group;
}

TrajectoryGroup run_rollout(Mode mode, const PolicySet& policies,
                            const Corpus& corpus, const std::string& query,
                            const std::vector<std::string>& gold,
                            const RolloutConfig& config, std::uint64_t seed) {
  return mode == Mode::Hierarchical
             ? run_hierarchical_rollout(policies, corpus, query, gold, config, seed)
             : run_monolithic_rollout(policies, corpus, query, gold, config, seed);
}

std::uint64_t rollout_seed(std::uint64_t base_seed, std::size_t index) {
  return mix(base_seed ^ mix(static_cast<std::uint64_t>(index) + 1));
}

RolloutBatch collect_batch(Mode mode, const PolicySet& policies,
                           const Corpus& corpus, const std::string& query,
                           const std::vector<std::string>& gold, std::size_t k,
                           const RolloutConfig& config, std::uint64_t base_seed) {
  if (k < 2) {
    throw PreconditionError("collect_batch needs k >= 2 rollouts, got " +
                            std::to_string(k));
  }
  RolloutBatch batch{query, gold, {}};
  batch.groups.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    batch.groups.push_back(run_rollout(mode, policies, corpus, query, gold,
                                       config, rollout_seed(base_seed, i)));
  }
  return batch;
}

}  // namespace hieragent
