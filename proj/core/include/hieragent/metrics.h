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

// Answer-level QA metrics: exact match, token F1, cover exact match.

#include <string>
#include <string_view>
#include <vector>

namespace hieragent {

// Lowercase, drop ASCII punctuation, drop the articles a/an/the as whole
// words, collapse whitespace.
std::string normalize_answer(std::string_view text);

// Multiset token overlap F1 of the normalized strings. Both empty scores 1;
// exactly one empty scores 0.
double token_f1(std::string_view pred, std::string_view gold);

int exact_match(std::string_view pred, const std::vector<std::string>& gold);

// 1 iff some normalized gold is a substring of the normalized prediction.
int cover_exact_match(std::string_view pred,
                      const std::vector<std::string>& gold);

double max_f1(std::string_view pred, const std::vector<std::string>& gold);

}  // namespace hieragent
