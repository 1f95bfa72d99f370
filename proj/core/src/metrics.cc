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

#include "hieragent/metrics.h"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace hieragent {

namespace {

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  for (std::string w; in >> w;) out.push_back(std::move(w));
  return out;
}

}  // namespace

std::string normalize_answer(std::string_view text) {
  std::string lowered;
  lowered.reserve(text.size());
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x80 && std::ispunct(u)) continue;
    lowered += static_cast<char>(std::tolower(u));
  }
  std::string out;
  for (const auto& w : words(lowered)) {
    if (w == "a" || w == "an" || w == "the") continue;
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

double token_f1(std::string_view pred, std::string_view gold) {
  const auto p = words(normalize_answer(pred));
  const auto g = words(normalize_answer(gold));
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  std::map<std::string, int> counts;
  for (const auto& w : g) ++counts[w];
  int overlap = 0;
  for (const auto& w : p) {
    if (auto it = counts.find(w); it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / p.size();
  const double recall = static_cast<double>(overlap) / g.size();
  return 2.0 * precision * recall / (precision + recall);
}

int exact_match(std::string_view pred, const std::vector<std::string>& gold) {
  const auto p = normalize_answer(pred);
  return std::any_of(gold.begin(), gold.end(),
                     [&](const std::string& g) { return normalize_answer(g) == p; })
             ? 1
             : 0;
}

int cover_exact_match(std::string_view pred,
                      const std::vector<std::string>& gold) {
  const auto p = normalize_answer(pred);
  return std::any_of(gold.begin(), gold.end(),
                     [&](const std::string& g) {
                       return p.find(normalize_answer(g)) != std::string::npos;
                     })
             ? 1
             : 0;
}

double max_f1(std::string_view pred, const std::vector<std::string>& gold) {
  double best = 0.0;
  for (const auto& g : gold) best = std::max(best, token_f1(pred, g));
  return best;
}

}  // namespace hieragent
