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

// Parameterized multi-hop workload with fixed-size tasks, results and
// documents, used to measure context growth against hop count and top-k.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hieragent/policy.h"
#include "hieragent/retrieval.h"

namespace hieragent {

struct SyntheticSpec {
  std::size_t hops = 3;             // H: planner sub-tasks before answering
  std::size_t doc_len = 2000;       // tokens per source document
  std::size_t res_len = 50;         // tokens per executor result
  std::size_t task_len = 12;        // tokens per planner task
  std::size_t topics = 6;           // corpus topics; must be >= hops
  std::size_t docs_per_topic = 4;
  std::size_t chunk_size = kDefaultChunkSize;
  std::uint64_t variant = 0;        // varies wording between questions
};

struct SyntheticWorkload {
  std::vector<CorpusRecord> corpus;
  std::vector<ScriptEntry> script;  // planner, executor and monolithic turns
  std::string query;
  std::vector<std::string> gold;
  std::vector<std::string> tasks;
  std::vector<std::string> results;
};

// Corpus content depends only on topics, docs_per_topic, doc_len and
// chunk_size, so workloads that differ only in hops share one corpus.
std::vector<CorpusRecord> synthetic_corpus(const SyntheticSpec& spec);

// The search query that retrieves topic `i`'s chunks.
std::string synthetic_topic_query(std::size_t topic);

SyntheticWorkload make_synthetic_workload(const SyntheticSpec& spec);

}  // namespace hieragent
