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

#include "hieragent/policy.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

#include "hieragent/error.h"
#include "hieragent/retrieval.h"
#include "hieragent/tokenizer.h"

namespace hieragent {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

struct Continuation {
  std::vector<std::string> tokens;
  std::vector<double> logprobs;
};

Continuation expand(const ScriptVariant& v, double per_token_prob) {
  Continuation c;
  c.tokens = tokenize_pieces(v.output);
  c.logprobs.assign(c.tokens.size(), std::log(per_token_prob));
  if (!c.logprobs.empty()) c.logprobs[0] += std::log(v.probability);
  return c;
}

GenResponse truncate(Continuation c, const GenRequest& request) {
  const std::size_t keep =
      stop_boundary(c.tokens, request.stop_tags, request.max_new_tokens);
  c.tokens.resize(keep);
  c.logprobs.resize(keep);
  GenResponse r;
  r.text = detokenize(c.tokens);
  r.tokens = std::move(c.tokens);
  r.logprobs = std::move(c.logprobs);
  return r;
}

GenResponse deterministic_response(std::string text, const GenRequest& request) {
  Continuation c;
  c.tokens = tokenize_pieces(text);
  c.logprobs.assign(c.tokens.size(), 0.0);
  return truncate(std::move(c), request);
}

// Content of the first segment of `kind` in `text`, trimmed.
std::optional<std::string> first_content(std::string_view text, TagKind kind) {
  const auto t = parse_transcript(text);
  for (const auto& s : t.segments) {
    if (s.kind == kind) return trim(s.content);
  }
  return std::nullopt;
}

std::optional<std::string> last_segment_text(std::string_view text,
                                             TagKind kind) {
  const auto t = parse_transcript(text);
  for (auto it = t.segments.rbegin(); it != t.segments.rend(); ++it) {
    if (it->kind == kind) {
      return std::string(text.substr(it->span.begin, it->span.size()));
    }
  }
  return std::nullopt;
}

std::string question_of(std::string_view prompt) {
  constexpr std::string_view kLabel = "Question: ";
  const auto at = prompt.find(kLabel);
  if (at == std::string_view::npos) return trim(prompt);
  const auto start = at + kLabel.size();
  const auto end = prompt.find('\n', start);
  return trim(prompt.substr(start, end == std::string_view::npos
                                       ? std::string_view::npos
                                       : end - start));
}

std::vector<std::string> sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if ((c == '.' || c == '?' || c == '!') &&
        (i + 1 == text.size() || text[i + 1] == ' ')) {
      if (auto s = trim(text.substr(start, i + 1 - start)); !s.empty()) {
        out.push_back(std::move(s));
      }
      start = i + 1;
    }
  }
  if (auto s = trim(text.substr(start)); !s.empty()) out.push_back(std::move(s));
  return out;
}

}  // namespace

std::string_view role_name(Role role) {
  switch (role) {
    case Role::Planner:
      return "planner";
    case Role::Executor:
      return "executor";
    case Role::Monolithic:
      return "monolithic";
  }
  return "planner";
}

Role role_from_name(std::string_view name) {
  if (name == "planner") return Role::Planner;
  if (name == "executor") return Role::Executor;
  if (name == "monolithic") return Role::Monolithic;
  throw ConfigError("unknown role: " + std::string(name));
}

TranscriptRole transcript_role(Role role) {
  switch (role) {
    case Role::Planner:
      return TranscriptRole::Planner;
    case Role::Executor:
      return TranscriptRole::Executor;
    case Role::Monolithic:
      return TranscriptRole::Monolithic;
  }
  return TranscriptRole::Executor;
}

std::size_t stop_boundary(const std::vector<std::string>& tokens,
                          const std::vector<TagKind>& stop_tags,
                          std::size_t max_new_tokens) {
  std::size_t keep = tokens.size();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto piece = trim(tokens[i]);
    bool hit = false;
    for (TagKind k : stop_tags) hit = hit || piece == close_tag(k);
    if (hit) {
      keep = i + 1;
      break;
    }
  }
  return std::min(keep, max_new_tokens);
}

std::string prompt_digest(std::string_view prompt) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : prompt) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ScriptedPolicy::ScriptedPolicy(std::vector<ScriptEntry> entries)
    : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    const std::string where = "script entry " + std::to_string(i);
    if (e.variants.empty()) throw ConfigError(where + " has no output");
    if (!(e.per_token_prob > 0.0 && e.per_token_prob <= 1.0)) {
      throw ConfigError(where + ": per_token_prob must be in (0, 1]");
    }
    double total = 0.0;
    for (const auto& v : e.variants) {
      if (!(v.probability > 0.0 && v.probability <= 1.0)) {
        throw ConfigError(where + ": variant probability must be in (0, 1]");
      }
      total += v.probability;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw ConfigError(where + ": variant probabilities sum to " +
                        std::to_string(total));
    }
  }
}

ScriptedPolicy ScriptedPolicy::from_json(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
    std::vector<ScriptEntry> entries;
    for (const auto& item : j.at("entries")) {
      ScriptEntry e;
      e.role = role_from_name(item.at("role").get<std::string>());
      if (item.contains("prompt_digest")) {
        e.prompt_digest = item.at("prompt_digest").get<std::string>();
      }
      if (item.contains("ordinal")) e.ordinal = item.at("ordinal").get<int>();
      if (item.contains("variants")) {
        for (const auto& v : item.at("variants")) {
          e.variants.push_back({v.at("output").get<std::string>(),
                                v.at("probability").get<double>()});
        }
      } else {
        e.variants.push_back({item.at("output").get<std::string>(), 1.0});
      }
      e.per_token_prob = item.value("per_token_prob", 1.0);
      entries.push_back(std::move(e));
    }
    return ScriptedPolicy(std::move(entries));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed policy script: ") + e.what());
  }
}

ScriptedPolicy ScriptedPolicy::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open policy script: " + path);
  return from_json(in);
}

const ScriptEntry* ScriptedPolicy::find(const GenRequest& request) const {
  const std::string digest = prompt_digest(request.prompt);
  for (const auto& e : entries_) {
    if (e.role == request.role && e.prompt_digest == digest) return &e;
  }
  for (const auto& e : entries_) {
    if (e.role == request.role && !e.prompt_digest &&
        e.ordinal == request.ordinal) {
      return &e;
    }
  }
  for (const auto& e : entries_) {
    if (e.role == request.role && !e.prompt_digest && !e.ordinal) return &e;
  }
  return nullptr;
}

GenResponse ScriptedPolicy::generate(const GenRequest& request) const {
  const ScriptEntry* entry = find(request);
  if (entry == nullptr) {
    throw ScriptedGapError(std::string(role_name(request.role)),
                           prompt_digest(request.prompt), request.ordinal);
  }
  std::size_t pick = 0;
  if (entry->variants.size() > 1) {
    const std::uint64_t bits = splitmix64(
        request.sample_seed ^
        splitmix64(static_cast<std::uint64_t>(request.role) * 1000003ULL +
                   static_cast<std::uint64_t>(request.ordinal)));
    const double u = unit_interval(bits);
    double acc = 0.0;
    pick = entry->variants.size() - 1;
    for (std::size_t i = 0; i < entry->variants.size(); ++i) {
      acc += entry->variants[i].probability;
      if (u < acc) {
        pick = i;
        break;
      }
    }
  }
  return truncate(expand(entry->variants[pick], entry->per_token_prob), request);
}

std::vector<double> ScriptedPolicy::score_tokens(
    const GenRequest& context, const std::vector<std::string>& tokens) const {
  const double off = std::log(kOffScriptProbability);
  const ScriptEntry* entry = find(context);
  if (entry != nullptr) {
    for (const auto& v : entry->variants) {
      auto c = expand(v, entry->per_token_prob);
      if (c.tokens.size() >= tokens.size() &&
          std::equal(tokens.begin(), tokens.end(), c.tokens.begin())) {
        c.logprobs.resize(tokens.size());
        return c.logprobs;
      }
    }
  }
  return std::vector<double>(tokens.size(), off);
}

std::string heuristic_executor_policy(
    std::string_view task, const std::optional<std::string>& docs_block) {
  const std::string t = trim(task);
  if (!docs_block) {
    return wrap(TagKind::Think, "I need to find out: " + t) + "\n" +
           wrap(TagKind::Search, t);
  }
  const auto entries = parse_documents_block(*docs_block);
  if (entries.empty()) {
    return wrap(TagKind::Think, "No documents were retrieved for this task.") +
           "\n" + wrap(TagKind::Result, kUnknownResult);
  }
  const std::string span = trim(entries.front().title);
  std::string evidence;
  for (const auto& e : entries) {
    for (auto& s : sentences(e.body)) {
      if (s.find(span) != std::string::npos) {
        evidence = std::move(s);
        break;
      }
    }
    if (!evidence.empty()) break;
  }
  if (evidence.empty()) {
    const auto first = sentences(entries.front().body);
    evidence = first.empty() ? span : first.front();
  }
  return wrap(TagKind::Refine, neutralize_tags(evidence)) + "\n" +
         wrap(TagKind::Result, neutralize_tags(span));
}

GenResponse HeuristicPolicy::generate(const GenRequest& request) const {
  switch (request.role) {
    case Role::Executor: {
      const auto task = first_content(request.prompt, TagKind::Task);
      return deterministic_response(
          heuristic_executor_policy(task.value_or(""),
                                    last_segment_text(request.prompt,
                                                      TagKind::Documents)),
          request);
    }
    case Role::Planner: {
      const auto result = first_content(request.prompt, TagKind::Result);
      if (!result) {
        return deterministic_response(
            wrap(TagKind::Think, "I will delegate the whole question.") +
                "\n" + wrap(TagKind::Task, question_of(request.prompt)),
            request);
      }
      return deterministic_response(
          wrap(TagKind::Think, "The executor has answered the question.") +
              "\n" + wrap(TagKind::Answer, *result),
          request);
    }
    case Role::Monolithic: {
      const auto docs = last_segment_text(request.prompt, TagKind::Documents);
      if (!docs) {
        const auto q = question_of(request.prompt);
        return deterministic_response(
            wrap(TagKind::Think, "I'll issue a search request.") + "\n" +
                wrap(TagKind::Search, q),
            request);
      }
      const auto entries = parse_documents_block(*docs);
      const std::string answer =
          entries.empty() ? std::string(kUnknownResult) : trim(entries[0].title);
      return deterministic_response(
          wrap(TagKind::Refine, "The top document is " + answer + ".") + "\n" +
              wrap(TagKind::Answer, answer),
          request);
    }
  }
  throw PreconditionError("unknown role");
}

std::vector<double> HeuristicPolicy::score_tokens(
    const GenRequest& context, const std::vector<std::string>& tokens) const {
  GenRequest unbounded = context;
  unbounded.max_new_tokens = tokens.size() + 1;
  unbounded.stop_tags.clear();
  const auto expected = generate(unbounded).tokens;
  std::vector<double> out(tokens.size(), std::log(kOffScriptProbability));
  for (std::size_t i = 0; i < tokens.size() && i < expected.size(); ++i) {
    if (tokens[i] != expected[i]) break;
    out[i] = 0.0;
  }
  return out;
}

PolicyHandle::PolicyHandle(SnapshotId id, std::shared_ptr<const Policy> impl)
    : id_(id), impl_(std::move(impl)) {
  if (!impl_) throw PreconditionError("policy handle without implementation");
}

GenResponse PolicyHandle::generate(const GenRequest& request) const {
  if (request.stop_tags.empty()) {
    throw PreconditionError("generation request without stop tags");
  }
  if (request.max_new_tokens < 1) {
    throw PreconditionError("max_new_tokens must be at least 1");
  }
  return impl_->generate(request);
}

std::vector<double> PolicyHandle::score_tokens(
    const GenRequest& context, const std::vector<std::string>& tokens) const {
  return impl_->score_tokens(context, tokens);
}

PolicySet PolicySet::single(std::shared_ptr<const Policy> policy) {
  return PolicySet{PolicyHandle(SnapshotId::Current, policy),
                   PolicyHandle(SnapshotId::Old, policy),
                   PolicyHandle(SnapshotId::Reference, policy)};
}

}  // namespace hieragent
