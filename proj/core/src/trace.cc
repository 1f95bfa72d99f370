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

#include "hieragent/trace.h"

#include <fstream>
#include <set>
#include <sstream>

#include "hieragent/error.h"

namespace hieragent {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string dump_line(const ordered_json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field '") + key +
                      "' has the wrong type: " + j.at(key).dump());
  }
}

std::string_view origin_name(Origin o) {
  return o == Origin::Agent ? "agent" : "environment";
}

Origin origin_from_name(const std::string& s) {
  if (s == "agent") return Origin::Agent;
  if (s == "environment") return Origin::Environment;
  throw IntegrityError("unknown chunk origin: " + s);
}

ordered_json trajectory_to_json(const Trajectory& t) {
  ordered_json j;
  j["role"] = role_name(t.role());
  j["parent_step"] =
      t.parent_step() ? ordered_json(*t.parent_step()) : ordered_json(nullptr);
  auto& chunks = j["chunks"] = ordered_json::array();
  for (const auto& c : t.chunks()) {
    chunks.push_back({{"origin", origin_name(c.origin)}, {"text", c.text}});
  }
  j["tokens"] = t.tokens();
  j["mask"] = t.mask();
  j["logprobs"] = {{"current", t.logprobs_current()},
                   {"old", t.logprobs_old()},
                   {"reference", t.logprobs_reference()}};
  return j;
}

Trajectory trajectory_from_json(const json& j, const std::string& label) {
  const Role role = role_from_name(j.at("role").get<std::string>());
  std::optional<int> parent;
  if (!j.at("parent_step").is_null()) parent = j.at("parent_step").get<int>();
  std::vector<TextChunk> chunks;
  for (const auto& c : j.at("chunks")) {
    chunks.push_back({c.at("text").get<std::string>(),
                      origin_from_name(c.at("origin").get<std::string>())});
  }
  Trajectory t = Trajectory::from_chunks(role, parent, std::move(chunks));
  if (j.at("tokens").get<std::vector<std::string>>() != t.tokens()) {
    throw IntegrityError("trajectory " + label +
                         ": stored tokens do not match its chunks");
  }
  if (j.at("mask").get<std::vector<std::uint8_t>>() != t.mask()) {
    throw IntegrityError("trajectory " + label +
                         ": stored mask does not match its chunks");
  }
  const auto& lp = j.at("logprobs");
  t.set_logprobs(lp.at("current").get<std::vector<double>>(),
                 lp.at("old").get<std::vector<double>>(),
                 lp.at("reference").get<std::vector<double>>());
  t.check_integrity(label);
  return t;
}

}  // namespace

void RunConfig::validate() const {
  if (top_k < 1) throw ConfigError("top_k must be >= 1");
  if (k_rollouts < 1) throw ConfigError("k_rollouts must be >= 1");
  if (max_planner_steps < 1) throw ConfigError("max_planner_steps must be >= 1");
  if (chunk_size < 1) throw ConfigError("chunk_size must be >= 1");
  if (max_new_tokens < 1) throw ConfigError("max_new_tokens must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ConfigError("epsilon must be in (0, 1)");
  }
  if (!(beta >= 0.0)) throw ConfigError("beta must be >= 0");
  if (!(delta >= 0.0)) throw ConfigError("delta must be >= 0");
}

RolloutConfig RunConfig::rollout_config() const {
  RolloutConfig c;
  c.top_k = top_k;
  c.max_planner_steps = max_planner_steps;
  c.max_executor_search_turns = max_executor_search_turns;
  c.max_monolithic_searches = max_monolithic_searches;
  c.max_new_tokens = max_new_tokens;
  c.planner_preamble = planner_preamble;
  c.executor_preamble = executor_preamble;
  c.monolithic_preamble = monolithic_preamble;
  return c;
}

HyperParams RunConfig::hyper_params() const {
  HyperParams hp;
  hp.epsilon = epsilon;
  hp.beta = beta;
  hp.delta = delta;
  hp.k = k_rollouts;
  return hp;
}

ordered_json RunConfig::to_json() const {
  ordered_json j;
  j["mode"] = mode_name(mode);
  j["top_k"] = top_k;
  j["k_rollouts"] = k_rollouts;
  j["max_planner_steps"] = max_planner_steps;
  j["max_executor_search_turns"] = max_executor_search_turns;
  j["epsilon"] = epsilon;
  j["beta"] = beta;
  j["delta"] = delta;
  j["seed"] = seed;
  j["corpus_path"] = corpus_path;
  j["policy_path"] = policy_path;
  j["questions_path"] = questions_path;
  j["output_dir"] = output_dir;
  j["chunk_size"] = chunk_size;
  j["max_new_tokens"] = max_new_tokens;
  j["max_monolithic_searches"] = max_monolithic_searches;
  j["planner_preamble"] = planner_preamble;
  j["executor_preamble"] = executor_preamble;
  j["monolithic_preamble"] = monolithic_preamble;
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {
      "mode", "top_k", "k_rollouts", "max_planner_steps",
      "max_executor_search_turns", "epsilon", "beta", "delta", "seed",
      "corpus_path", "policy_path", "questions_path", "output_dir",
      "chunk_size", "max_new_tokens", "max_monolithic_searches",
      "planner_preamble", "executor_preamble", "monolithic_preamble"};
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) {
      throw ConfigError("unknown config key: " + item.key());
    }
  }
  RunConfig c;
  std::string mode{mode_name(c.mode)};
  read_field(j, "mode", mode);
  c.mode = mode_from_name(mode);
  read_field(j, "top_k", c.top_k);
  read_field(j, "k_rollouts", c.k_rollouts);
  read_field(j, "max_planner_steps", c.max_planner_steps);
  read_field(j, "max_executor_search_turns", c.max_executor_search_turns);
  read_field(j, "epsilon", c.epsilon);
  read_field(j, "beta", c.beta);
  read_field(j, "delta", c.delta);
  read_field(j, "seed", c.seed);
  read_field(j, "corpus_path", c.corpus_path);
  read_field(j, "policy_path", c.policy_path);
  read_field(j, "questions_path", c.questions_path);
  read_field(j, "output_dir", c.output_dir);
  read_field(j, "chunk_size", c.chunk_size);
  read_field(j, "max_new_tokens", c.max_new_tokens);
  read_field(j, "max_monolithic_searches", c.max_monolithic_searches);
  read_field(j, "planner_preamble", c.planner_preamble);
  read_field(j, "executor_preamble", c.executor_preamble);
  read_field(j, "monolithic_preamble", c.monolithic_preamble);
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + path + ": " + e.what());
  }
  return from_json(j);
}

void RunConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config: " + path);
  out << to_json().dump(2) << '\n';
}

std::vector<QuestionRecord> read_questions_jsonl(std::istream& in) {
  std::vector<QuestionRecord> out;
  std::set<std::string> seen;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    QuestionRecord q;
    try {
      const auto j = json::parse(line);
      q.id = j.at("id").get<std::string>();
      q.question = j.at("question").get<std::string>();
      q.answers = j.at("answers").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      throw ConfigError("questions line " + std::to_string(lineno) + ": " +
                        e.what());
    }
    if (q.answers.empty()) {
      throw ConfigError("question " + q.id + " has no gold answers");
    }
    if (!seen.insert(q.id).second) {
      throw ConfigError("duplicate question id: " + q.id);
    }
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<QuestionRecord> read_questions_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open questions file: " + path);
  return read_questions_jsonl(in);
}

ordered_json reward_to_json(const RewardBreakdown& r) {
  return {{"r_ans", r.r_ans},
          {"r_format", r.r_format},
          {"r_refine", r.r_refine},
          {"total", r.total}};
}

ordered_json budget_to_json(const TokenBudgetReport& b) {
  return {{"peak_planner_tokens", b.peak_planner_tokens},
          {"peak_executor_tokens", b.peak_executor_tokens},
          {"peak_monolithic_tokens", b.peak_monolithic_tokens},
          {"per_hop_planner_tokens", b.per_hop_planner_tokens}};
}

std::string trace_line(const TraceRecord& r) {
  const TrajectoryGroup& g = r.group;
  ordered_json j;
  j["question_id"] = r.question_id;
  j["rollout"] = r.rollout;
  j["seed"] = g.seed;
  j["mode"] = mode_name(g.mode);
  j["query"] = g.query;
  j["gold_answers"] = g.gold_answers;
  j["final_answer"] =
      g.final_answer ? ordered_json(*g.final_answer) : ordered_json(nullptr);
  if (g.strategic_context) {
    const StrategicContext& c = *g.strategic_context;
    auto steps = ordered_json::array();
    for (const auto& s : c.steps()) {
      steps.push_back({{"task", s.task_text},
                       {"result", s.result_text ? ordered_json(*s.result_text)
                                                : ordered_json(nullptr)}});
    }
    j["strategic_context"] = {{"preamble", c.system_preamble()},
                              {"max_planner_steps", c.max_planner_steps()},
                              {"steps", steps}};
  } else {
    j["strategic_context"] = nullptr;
  }
  auto& trajs = j["trajectories"] = ordered_json::array();
  for (const auto& t : g.trajectories) trajs.push_back(trajectory_to_json(t));
  j["raw_docs"] = g.raw_docs;
  j["reward"] = reward_to_json(r.reward);
  j["advantage"] =
      r.advantage ? ordered_json(*r.advantage) : ordered_json(nullptr);
  j["budget"] = budget_to_json(g.budget);
  return dump_line(j);
}

TraceRecord parse_trace_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw IntegrityError(std::string("malformed trace line: ") + e.what());
  }
  TraceRecord r;
  try {
    r.question_id = j.at("question_id").get<std::string>();
    r.rollout = j.at("rollout").get<std::size_t>();
    TrajectoryGroup& g = r.group;
    g.seed = j.at("seed").get<std::uint64_t>();
    g.mode = mode_from_name(j.at("mode").get<std::string>());
    g.query = j.at("query").get<std::string>();
    g.gold_answers = j.at("gold_answers").get<std::vector<std::string>>();
    if (!j.at("final_answer").is_null()) {
      g.final_answer = j.at("final_answer").get<std::string>();
    }
    if (const auto& sc = j.at("strategic_context"); !sc.is_null()) {
      StrategicContext c(g.query, sc.at("preamble").get<std::string>(),
                         sc.at("max_planner_steps").get<std::size_t>());
      for (const auto& s : sc.at("steps")) {
        c.append_plan_step(s.at("task").get<std::string>());
        if (!s.at("result").is_null()) {
          c.close_plan_step(s.at("result").get<std::string>());
        }
      }
      g.strategic_context = std::move(c);
    }
    const auto& trajs = j.at("trajectories");
    for (std::size_t i = 0; i < trajs.size(); ++i) {
      g.trajectories.push_back(trajectory_from_json(
          trajs[i], r.question_id + "/" + std::to_string(r.rollout) + "/" +
                        std::to_string(i)));
    }
    if (g.trajectories.empty()) {
      throw IntegrityError("trace record " + r.question_id +
                           " has no trajectories");
    }
    g.raw_docs = j.at("raw_docs").get<std::vector<std::string>>();
    const auto& rw = j.at("reward");
    r.reward = {rw.at("r_ans").get<double>(), rw.at("r_format").get<int>(),
                rw.at("r_refine").get<double>(), rw.at("total").get<double>()};
    if (!j.at("advantage").is_null()) r.advantage = j.at("advantage").get<double>();
    const auto& b = j.at("budget");
    g.budget.peak_planner_tokens = b.at("peak_planner_tokens").get<std::size_t>();
    g.budget.peak_executor_tokens =
        b.at("peak_executor_tokens").get<std::size_t>();
    g.budget.peak_monolithic_tokens =
        b.at("peak_monolithic_tokens").get<std::size_t>();
    g.budget.per_hop_planner_tokens =
        b.at("per_hop_planner_tokens").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw IntegrityError(std::string("malformed trace record: ") + e.what());
  } catch (const ProtocolViolation& e) {
    throw IntegrityError(std::string("inconsistent strategic context: ") +
                         e.what());
  } catch (const ConfigError& e) {
    throw IntegrityError(std::string("malformed trace record: ") + e.what());
  }
  return r;
}

std::vector<TraceRecord> read_trace(std::istream& in) {
  std::vector<TraceRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_trace_line(line));
  }
  return out;
}

std::vector<TraceRecord> read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace file: " + path);
  return read_trace(in);
}

}  // namespace hieragent
