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

#include "hieragent/tag_protocol.h"

#include <algorithm>
#include <cctype>

namespace hieragent {

namespace {

constexpr std::array<std::string_view, 7> kNames = {
    "think", "task", "answer", "search", "documents", "refine", "result"};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)); }

// Length of the known tag delimiter starting at `pos`, 0 if none. Sets
// `kind` and `closing` on success.
std::size_t match_delimiter(std::string_view text, std::size_t pos,
                            TagKind& kind, bool& closing) {
  if (pos >= text.size() || text[pos] != '<') return 0;
  std::size_t p = pos + 1;
  closing = false;
  if (p < text.size() && text[p] == '/') {
    closing = true;
    ++p;
  }
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    const auto name = kNames[i];
    if (text.substr(p, name.size()) == name && p + name.size() < text.size() &&
        text[p + name.size()] == '>') {
      kind = kAllTagKinds[i];
      return p + name.size() + 1 - pos;
    }
  }
  return 0;
}

// Offset of the next known opening tag at or after `from`, npos if none.
std::size_t find_next_open(std::string_view text, std::size_t from) {
  for (std::size_t pos = text.find('<', from); pos != std::string_view::npos;
       pos = text.find('<', pos + 1)) {
    TagKind kind;
    bool closing;
    if (match_delimiter(text, pos, kind, closing) > 0 && !closing) return pos;
  }
  return std::string_view::npos;
}

bool has_known_delimiter(std::string_view text) {
  for (std::size_t pos = text.find('<'); pos != std::string_view::npos;
       pos = text.find('<', pos + 1)) {
    TagKind kind;
    bool closing;
    if (match_delimiter(text, pos, kind, closing) > 0) return true;
  }
  return false;
}

bool stray_delimiter_in_gaps(const TaggedTranscript& t,
                             std::string_view source) {
  return std::any_of(t.untagged_gaps.begin(), t.untagged_gaps.end(),
                     [&](const ByteSpan& gap) {
                       return has_known_delimiter(
                           source.substr(gap.begin, gap.size()));
                     });
}

bool nonempty(const TagSegment& s) { return !trim(s.content).empty(); }

using Turn = std::vector<const TagSegment*>;

// Splits at Documents observations. Each Documents segment closes the turn
// before it; `trailing_empty` is set when the transcript ends on one.
std::vector<Turn> split_turns(const TaggedTranscript& t, bool& trailing_empty) {
  std::vector<Turn> turns(1);
  for (const auto& seg : t.segments) {
    if (seg.kind == TagKind::Documents) {
      turns.emplace_back();
    } else {
      turns.back().push_back(&seg);
    }
  }
  trailing_empty = turns.size() > 1 && turns.back().empty();
  if (trailing_empty) turns.pop_back();
  return turns;
}

// The single action of a turn, required to be its last segment. Returns
// nullptr when the turn has zero actions, several, or trailing segments.
const TagSegment* sole_trailing_action(const Turn& turn,
                                       std::initializer_list<TagKind> actions) {
  const TagSegment* found = nullptr;
  for (const auto* seg : turn) {
    if (std::find(actions.begin(), actions.end(), seg->kind) != actions.end()) {
      if (found != nullptr) return nullptr;
      found = seg;
    }
  }
  if (found == nullptr || found != turn.back()) return nullptr;
  return found;
}

bool only_kinds(const Turn& turn, std::initializer_list<TagKind> allowed) {
  return std::all_of(turn.begin(), turn.end(), [&](const TagSegment* s) {
    return std::find(allowed.begin(), allowed.end(), s->kind) != allowed.end();
  });
}

bool has_kind(const Turn& turn, TagKind kind) {
  return std::any_of(turn.begin(), turn.end(),
                     [&](const TagSegment* s) { return s->kind == kind; });
}

}  // namespace

std::string_view tag_name(TagKind kind) {
  return kNames[static_cast<std::size_t>(kind)];
}

std::optional<TagKind> tag_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return kAllTagKinds[i];
  }
  return std::nullopt;
}

std::string open_tag(TagKind kind) {
  return "<" + std::string(tag_name(kind)) + ">";
}

std::string close_tag(TagKind kind) {
  return "</" + std::string(tag_name(kind)) + ">";
}

std::string wrap(TagKind kind, std::string_view content) {
  std::string out = open_tag(kind);
  out.append(content);
  out += close_tag(kind);
  return out;
}

std::string trim(std::string_view text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && is_space(text[b])) ++b;
  while (e > b && is_space(text[e - 1])) --e;
  return std::string(text.substr(b, e - b));
}

bool is_observation(TagKind kind, TranscriptRole role) {
  if (kind == TagKind::Documents) return true;
  return kind == TagKind::Result && role == TranscriptRole::Planner;
}

std::string TaggedTranscript::reconstruct(std::string_view source) const {
  std::vector<ByteSpan> spans;
  spans.reserve(segments.size() + untagged_gaps.size());
  for (const auto& s : segments) spans.push_back(s.span);
  spans.insert(spans.end(), untagged_gaps.begin(), untagged_gaps.end());
  std::sort(spans.begin(), spans.end(),
            [](const ByteSpan& a, const ByteSpan& b) { return a.begin < b.begin; });
  std::string out;
  out.reserve(source.size());
  for (const auto& s : spans) out.append(source.substr(s.begin, s.size()));
  return out;
}

TaggedTranscript parse_transcript(std::string_view text, TranscriptRole role) {
  TaggedTranscript out;
  std::size_t gap_start = 0;
  std::size_t pos = 0;

  auto flush_gap = [&](std::size_t until) {
    if (until > gap_start) out.untagged_gaps.push_back({gap_start, until});
  };

  while (pos < text.size()) {
    const std::size_t lt = text.find('<', pos);
    if (lt == std::string_view::npos) break;
    TagKind kind;
    bool closing;
    const std::size_t open_len = match_delimiter(text, lt, kind, closing);
    if (open_len == 0 || closing) {
      pos = lt + 1;
      continue;
    }
    const std::size_t body = lt + open_len;
    const std::string close = close_tag(kind);
    const std::size_t close_at = text.find(close, body);
    const std::size_t next_open = find_next_open(text, body);
    if (close_at == std::string_view::npos ||
        (next_open != std::string_view::npos && next_open < close_at)) {
      pos = lt + 1;
      continue;
    }
    const std::size_t end = close_at + close.size();
    flush_gap(lt);
    out.segments.push_back(TagSegment{
        kind, std::string(text.substr(body, close_at - body)), {lt, end},
        is_observation(kind, role) ? Origin::Environment : Origin::Agent});
    gap_start = end;
    pos = end;
  }
  flush_gap(text.size());
  return out;
}

int planner_format_ok(const TaggedTranscript& turn, std::string_view source) {
  if (turn.segments.empty() || stray_delimiter_in_gaps(turn, source)) return 0;
  const auto& last = turn.segments.back();
  if (last.kind != TagKind::Task && last.kind != TagKind::Answer) return 0;
  if (!nonempty(last)) return 0;
  for (std::size_t i = 0; i + 1 < turn.segments.size(); ++i) {
    if (turn.segments[i].kind != TagKind::Think) return 0;
  }
  return 1;
}

int executor_format_ok(const TaggedTranscript& transcript,
                       std::string_view source) {
  if (stray_delimiter_in_gaps(transcript, source)) return 0;
  bool trailing_empty = false;
  const auto turns = split_turns(transcript, trailing_empty);
  // Ending on an observation means the last search never got a result.
  if (trailing_empty) return 0;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const Turn& turn = turns[i];
    if (turn.empty()) return 0;
    if (!only_kinds(turn, {TagKind::Think, TagKind::Refine, TagKind::Search,
                           TagKind::Result})) {
      return 0;
    }
    if (i == 0 && has_kind(turn, TagKind::Refine)) return 0;
    const TagSegment* action =
        sole_trailing_action(turn, {TagKind::Search, TagKind::Result});
    if (action == nullptr || !nonempty(*action)) return 0;
    const bool is_final = i + 1 == turns.size();
    if (is_final != (action->kind == TagKind::Result)) return 0;
  }
  return 1;
}

MonolithicFormat monolithic_format_ok(const TaggedTranscript& transcript,
                                      std::string_view source) {
  MonolithicFormat out;
  if (stray_delimiter_in_gaps(transcript, source)) return out;
  bool trailing_empty = false;
  const auto turns = split_turns(transcript, trailing_empty);

  out.search_ok = 1;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const Turn& turn = turns[i];
    const bool is_final = i + 1 == turns.size() && !trailing_empty;
    // Refinement needs retrieved documents to refine.
    if (i == 0 && has_kind(turn, TagKind::Refine)) out.search_ok = 0;
    if (!only_kinds(turn, {TagKind::Think, TagKind::Refine, TagKind::Search,
                           TagKind::Answer})) {
      out.search_ok = 0;
      continue;
    }
    const TagSegment* action =
        sole_trailing_action(turn, {TagKind::Search, TagKind::Answer});
    if (is_final) {
      if (action != nullptr && action->kind == TagKind::Answer &&
          nonempty(*action)) {
        out.answer_ok = 1;
      } else if (action == nullptr || action->kind == TagKind::Search) {
        // An unanswered final turn also leaves its search unserved.
        if (has_kind(turn, TagKind::Search)) out.search_ok = 0;
      }
    } else if (action == nullptr || action->kind != TagKind::Search ||
               !nonempty(*action)) {
      out.search_ok = 0;
    }
  }
  if (turns.empty() || turns.front().empty()) out.search_ok = 0;
  return out;
}

std::vector<std::string> extract_contents(const TaggedTranscript& transcript,
                                          TagKind kind) {
  std::vector<std::string> out;
  for (const auto& seg : transcript.segments) {
    if (seg.kind == kind) out.push_back(trim(seg.content));
  }
  return out;
}

std::size_t known_delimiter_at(std::string_view text, std::size_t pos) {
  TagKind kind;
  bool closing;
  return match_delimiter(text, pos, kind, closing);
}

std::string neutralize_tags(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    TagKind kind;
    bool closing;
    if (text[i] == '<' && match_delimiter(text, i, kind, closing) > 0) {
      out += "&lt;";
    } else {
      out += text[i];
    }
  }
  return out;
}

}  // namespace hieragent
