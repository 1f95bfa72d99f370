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

// Tag grammar shared by the planner, the executor and the monolithic
// baseline. See docs/protocol.md for the full grammar.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hieragent {

enum class TagKind { Think, Task, Answer, Search, Documents, Refine, Result };

inline constexpr std::array<TagKind, 7> kAllTagKinds = {
    TagKind::Think,  TagKind::Task,   TagKind::Answer, TagKind::Search,
    TagKind::Documents, TagKind::Refine, TagKind::Result};

std::string_view tag_name(TagKind kind);
std::optional<TagKind> tag_from_name(std::string_view name);
std::string open_tag(TagKind kind);
std::string close_tag(TagKind kind);

// `<kind>content</kind>`
std::string wrap(TagKind kind, std::string_view content);

enum class Origin { Agent, Environment };

// Which role produced the transcript. Only affects how Result segments are
// attributed: in a planner transcript they are observations returned by the
// engine, elsewhere they are agent actions.
enum class TranscriptRole { Planner, Executor, Monolithic };

struct ByteSpan {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive

  std::size_t size() const { return end - begin; }
  bool contains(std::size_t pos) const { return pos >= begin && pos < end; }
  friend bool operator==(const ByteSpan&, const ByteSpan&) = default;
};

struct TagSegment {
  TagKind kind;
  std::string content;  // untrimmed text between the delimiters
  ByteSpan span;        // covers the delimiters too
  Origin origin;

  friend bool operator==(const TagSegment&, const TagSegment&) = default;
};

struct TaggedTranscript {
  std::vector<TagSegment> segments;
  std::vector<ByteSpan> untagged_gaps;

  // Segments and gaps interleaved in offset order, sliced from `source`.
  std::string reconstruct(std::string_view source) const;
};

// Single left-to-right pass. A known opening tag becomes a segment only when
// its closing tag appears before the next known opening tag; everything else
// (unknown tags, unclosed or stray delimiters, plain text) lands in gaps.
TaggedTranscript parse_transcript(
    std::string_view text, TranscriptRole role = TranscriptRole::Executor);

// True for Documents, and for Result inside a planner transcript.
bool is_observation(TagKind kind, TranscriptRole role);

// Indicator for one planner decision turn: optional Think segments followed
// by exactly one non-empty Task or Answer.
int planner_format_ok(const TaggedTranscript& turn, std::string_view source);

// Indicator for a full executor sub-loop transcript, agent turns interleaved
// with Documents observations.
int executor_format_ok(const TaggedTranscript& transcript,
                       std::string_view source);

// Format indicators for a monolithic trajectory: `answer_ok` judges the
// terminal Answer, `search_ok` judges every search turn before it.
struct MonolithicFormat {
  int answer_ok = 0;
  int search_ok = 0;
};
MonolithicFormat monolithic_format_ok(const TaggedTranscript& transcript,
                                      std::string_view source);

// Trimmed contents of every segment of `kind`, in document order.
std::vector<std::string> extract_contents(const TaggedTranscript& transcript,
                                          TagKind kind);

// Length of the known tag delimiter (opening or closing) starting at `pos`,
// or 0 when there is none.
std::size_t known_delimiter_at(std::string_view text, std::size_t pos);

// Replaces the `<` of any known tag delimiter so that arbitrary corpus text
// can be embedded in an observation block without being parsed as a tag.
std::string neutralize_tags(std::string_view text);

std::string trim(std::string_view text);

}  // namespace hieragent
