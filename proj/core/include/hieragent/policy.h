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

// Generation interface standing in for the shared language model, with
// scripted and heuristic implementations.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hieragent/tag_protocol.h"

namespace hieragent {

enum class Role { Planner, Executor, Monolithic };

std::string_view role_name(Role role);
Role role_from_name(std::string_view name);  // throws ConfigError
TranscriptRole transcript_role(Role role);

struct GenRequest {
  std::string prompt;
  Role role = Role::Planner;
  std::vector<TagKind> stop_tags;
  std::size_t max_new_tokens = 1024;
  // Index of this call among calls with the same role inside one rollout.
  int ordinal = 0;
  // Drives variant choice in stochastic scripts; ignored elsewhere.
  std::uint64_t sample_seed = 0;
};

struct GenResponse {
  std::string text;
  std::vector<std::string> tokens;
  std::vector<double> logprobs;  // natural log, one per token, all <= 0
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual GenResponse generate(const GenRequest& request) const = 0;
  // Log-probability of each of `tokens` as a continuation of the request's
  // prompt. Must be a pure function of its arguments.
  virtual std::vector<double> score_tokens(
      const GenRequest& context, const std::vector<std::string>& tokens) const = 0;
};

// Cuts `tokens` after the first closing delimiter of a stop tag, then to at
// most `max_new_tokens`. Returns the number of tokens kept.
std::size_t stop_boundary(const std::vector<std::string>& tokens,
                          const std::vector<TagKind>& stop_tags,
                          std::size_t max_new_tokens);

// 64-bit FNV-1a of the prompt, as 16 lowercase hex digits.
std::string prompt_digest(std::string_view prompt);

struct ScriptVariant {
  std::string output;
  double probability = 1.0;
};

struct ScriptEntry {
  Role role = Role::Planner;
  std::optional<std::string> prompt_digest;
  std::optional<int> ordinal;
  std::vector<ScriptVariant> variants;
  double per_token_prob = 1.0;
};

// Turns looked up by (role, prompt digest), then (role, ordinal), then the
// first role-wide fallback entry, in file order within each class.
class ScriptedPolicy final : public Policy {
 public:
  explicit ScriptedPolicy(std::vector<ScriptEntry> entries);

  // {"entries": [{"role", "prompt_digest"|"ordinal"?, "output"|"variants",
  //   "per_token_prob"?}]}
  static ScriptedPolicy from_json(std::istream& in);
  static ScriptedPolicy from_file(const std::string& path);

  GenResponse generate(const GenRequest& request) const override;
  std::vector<double> score_tokens(
      const GenRequest& context,
      const std::vector<std::string>& tokens) const override;

  const std::vector<ScriptEntry>& entries() const { return entries_; }

 private:
  const ScriptEntry* find(const GenRequest& request) const;

  std::vector<ScriptEntry> entries_;
};

// Log-probability given to tokens a scripted policy would not emit.
inline constexpr double kOffScriptProbability = 1e-6;

// Deterministic stand-in for the executor role: searches the task verbatim,
// then refines and answers with the title of the top-ranked document.
std::string heuristic_executor_policy(
    std::string_view task, const std::optional<std::string>& docs_block);

inline constexpr std::string_view kUnknownResult = "unknown";

// Heuristic for all three roles. The planner delegates the whole question
// as one task and answers with the first result; the monolithic role does a
// single search and answers with the top title.
class HeuristicPolicy final : public Policy {
 public:
  GenResponse generate(const GenRequest& request) const override;
  std::vector<double> score_tokens(
      const GenRequest& context,
      const std::vector<std::string>& tokens) const override;
};

enum class SnapshotId { Current, Old, Reference };

// A frozen policy snapshot. Handles are cheap to copy and share the
// underlying immutable implementation.
class PolicyHandle {
 public:
  PolicyHandle(SnapshotId id, std::shared_ptr<const Policy> impl);

  SnapshotId id() const { return id_; }
  GenResponse generate(const GenRequest& request) const;
  std::vector<double> score_tokens(const GenRequest& context,
                                   const std::vector<std::string>& tokens) const;
  bool shares_implementation(const PolicyHandle& other) const {
    return impl_ == other.impl_;
  }

 private:
  SnapshotId id_;
  std::shared_ptr<const Policy> impl_;
};

// Rollouts sample from `old` (the behavior policy) and score with `current`
// and `reference`.
struct PolicySet {
  PolicyHandle current;
  PolicyHandle old;
  PolicyHandle reference;

  static PolicySet single(std::shared_ptr<const Policy> policy);
};

}  // namespace hieragent
