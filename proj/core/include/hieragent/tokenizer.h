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

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace hieragent {

// Counts prompt lengths for budget accounting. Any monotone, consistent
// tokenizer is acceptable; the default splits on whitespace.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::size_t count(std::string_view text) const = 0;
  virtual std::vector<std::string> split(std::string_view text) const = 0;
};

class WhitespaceTokenizer final : public Tokenizer {
 public:
  std::size_t count(std::string_view text) const override;
  std::vector<std::string> split(std::string_view text) const override;
};

std::shared_ptr<const Tokenizer> default_tokenizer();

// Lossless segmentation used for generated text: every known tag delimiter
// is one token, other text splits into words, and leading whitespace sticks
// to the token that follows it. Concatenating the pieces returns `text`.
std::vector<std::string> tokenize_pieces(std::string_view text);

std::string detokenize(const std::vector<std::string>& pieces);

}  // namespace hieragent
