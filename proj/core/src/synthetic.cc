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

#include "hieragent/synthetic.h"

#include <algorithm>
#include <string>

#include "hieragent/error.h"

namespace hieragent {

namespace {

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

// Exactly `len` whitespace tokens, starting with `head` and padded with
// numbered filler.
std::string fixed_length(std::vector<std::string> head, std::size_t len,
                         const std::string& filler) {
  head.resize(std::min(head.size(), len));
  for (std::size_t i = head.size(); i < len; ++i) {
    head.push_back(filler + std::to_string(i));
  }
  return join(head);
}

ScriptEntry by_ordinal(Role role, int ordinal, std::string output) {
  ScriptEntry e;
  e.role = role;
  e.ordinal = ordinal;
  e.variants.push_back({std::move(output), 1.0});
  return e;
}

}  // namespace

std::string synthetic_topic_query(std::size_t topic) {
  return "topic" + std::to_string(topic);
}

std::vector<CorpusRecord> synthetic_corpus(const SyntheticSpec& spec) {
  if (spec.chunk_size == 0) throw ConfigError("chunk_size must be >= 1");
  std::vector<CorpusRecord> out;
  for (std::size_t t = 0; t < spec.topics; ++t) {
    for (std::size_t d = 0; d < spec.docs_per_topic; ++d) {
      CorpusRecord r;
      r.id = "syn-" + std::to_string(t) + "-" + std::to_string(d);
      r.title = "Topic" + std::to_string(t) + " archive " + std::to_string(d);
      std::vector<std::string> words;
      words.reserve(spec.doc_len);
      const std::string stem =
          "w" + std::to_string(t) + "x" + std::to_string(d) + "y";
      for (std::size_t i = 0; i < spec.doc_len; ++i) {
        // One topic marker per chunk keeps every chunk of a topic tied.
        words.push_back(i % spec.chunk_size == 0 ? synthetic_topic_query(t)
                                                 : stem + std::to_string(i));
      }
      r.text = join(words);
      out.push_back(std::move(r));
    }
  }
  return out;
}

SyntheticWorkload make_synthetic_workload(const SyntheticSpec& spec) {
  if (spec.hops == 0) throw ConfigError("synthetic workload needs hops >= 1");
  if (spec.hops > spec.topics) {
    throw ConfigError("synthetic workload needs topics >= hops");
  }
  if (spec.task_len < 2 || spec.res_len < 1) {
    throw ConfigError("synthetic task_len must be >= 2 and res_len >= 1");
  }

  SyntheticWorkload w;
  w.corpus = synthetic_corpus(spec);
  const std::string v = std::to_string(spec.variant);
  w.query = "Which code links the " + std::to_string(spec.hops) +
            " topics of case " + v + "?";
  w.gold = {"code" + v};

  for (std::size_t i = 0; i < spec.hops; ++i) {
    const std::string topic = synthetic_topic_query(i);
    w.tasks.push_back(
        fixed_length({"report", topic}, spec.task_len, "c" + v + "q"));
    w.results.push_back(fixed_length({}, spec.res_len,
                                     "f" + std::to_string(i) + "c" + v + "r"));
  }

  const int hops = static_cast<int>(spec.hops);
  for (int i = 0; i < hops; ++i) {
    const std::string lead = i == 0 ? "" : "\n";
    const std::string topic = synthetic_topic_query(i);
    w.script.push_back(by_ordinal(
        Role::Planner, i,
        lead + "<think> next part " + std::to_string(i) + " </think>\n<task> " +
            w.tasks[i] + " </task>"));
    w.script.push_back(by_ordinal(
        Role::Executor, 2 * i,
        "<think> look up " + topic + " </think>\n<search> " + topic +
            " </search>"));
    w.script.push_back(by_ordinal(
        Role::Executor, 2 * i + 1,
        "\n<refine> " + w.results[i] + " </refine>\n<result> " + w.results[i] +
            " </result>"));
    const std::string mono_lead =
        i == 0 ? "<think> look up " + topic + " </think>"
               : "\n<refine> " + w.results[i - 1] + " </refine>";
    w.script.push_back(by_ordinal(
        Role::Monolithic, i,
        mono_lead + "\n<search> " + topic + " </search>"));
  }
  w.script.push_back(by_ordinal(
      Role::Planner, hops,
      "\n<think> all parts resolved </think>\n<answer> " + w.gold[0] +
          " </answer>"));
  w.script.push_back(by_ordinal(
      Role::Monolithic, hops,
      "\n<refine> " + w.results[spec.hops - 1] + " </refine>\n<answer> " +
          w.gold[0] + " </answer>"));
  return w;
}

}  // namespace hieragent
