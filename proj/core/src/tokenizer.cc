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

#include "hieragent/tokenizer.h"

#include <cctype>

#include "hieragent/tag_protocol.h"

namespace hieragent {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)); }

std::size_t delimiter_length(std::string_view text, std::size_t pos) {
  return known_delimiter_at(text, pos);
}

}  // namespace

std::size_t WhitespaceTokenizer::count(std::string_view text) const {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : text) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

std::vector<std::string> WhitespaceTokenizer::split(std::string_view text) const {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t b = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > b) out.emplace_back(text.substr(b, i - b));
  }
  return out;
}

std::shared_ptr<const Tokenizer> default_tokenizer() {
  static const auto instance = std::make_shared<const WhitespaceTokenizer>();
  return instance;
}

std::vector<std::string> tokenize_pieces(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t start = i;
    while (i < text.size() && is_space(text[i])) ++i;
    if (i == text.size()) {
      out.emplace_back(text.substr(start));
      break;
    }
    if (const std::size_t d = delimiter_length(text, i); d > 0) {
      i += d;
    } else {
      while (i < text.size() && !is_space(text[i]) &&
             delimiter_length(text, i) == 0) {
        ++i;
      }
    }
    out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

std::string detokenize(const std::vector<std::string>& pieces) {
  std::string out;
  for (const auto& p : pieces) out += p;
  return out;
}

}  // namespace hieragent
