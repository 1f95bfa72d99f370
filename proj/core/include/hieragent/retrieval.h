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

// Lexical retrieval environment: chunked corpus, BM25 inverted index and the
// `<documents>` observation format.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace hieragent {

inline constexpr std::size_t kDefaultChunkSize = 200;
inline constexpr int kIndexFormatVersion = 1;

struct CorpusRecord {
  std::string id;
  std::string title;
  std::string text;
};

using ChunkId = std::uint32_t;

struct DocChunk {
  ChunkId chunk_id = 0;  // position in the corpus; also the tie-break key
  std::string title;
  std::string body;  // whitespace tokens joined by single spaces
  std::string source_doc_id;

  friend bool operator==(const DocChunk&, const DocChunk&) = default;
};

struct Posting {
  ChunkId chunk_id;
  std::uint32_t term_frequency;
  friend bool operator==(const Posting&, const Posting&) = default;
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct ScoredChunk {
  DocChunk chunk;
  double score;
};

struct SearchResult {
  std::vector<ScoredChunk> ranked;
};

// Lowercased, ASCII punctuation stripped, empty terms dropped.
std::vector<std::string> normalize_terms(std::string_view text);

class Corpus {
 public:
  explicit Corpus(std::size_t chunk_size = kDefaultChunkSize,
                  Bm25Params params = {});

  // Chunks and indexes one record. Throws IngestError on a duplicate id.
  // Returns false (and adds nothing) when the text has no tokens.
  bool add_record(const CorpusRecord& record);

  // Builds a corpus whose index is derived from `chunks` alone.
  static Corpus from_chunks(std::vector<DocChunk> chunks,
                            std::size_t chunk_size = kDefaultChunkSize,
                            Bm25Params params = {});

  SearchResult search(std::string_view query, std::size_t top_k) const;

  const std::vector<DocChunk>& chunks() const { return chunks_; }
  const std::map<std::string, std::vector<Posting>>& index() const {
    return index_;
  }
  std::size_t chunk_size() const { return chunk_size_; }
  const Bm25Params& params() const { return params_; }
  std::size_t document_frequency(const std::string& term) const;
  double average_chunk_length() const;
  std::size_t skipped_records() const { return skipped_records_; }

  // Persisted form: a single JSON document with a format-version header.
  // Layout is described in docs/index_format.md.
  void save(std::ostream& out) const;
  static Corpus load(std::istream& in);

 private:
  void index_chunk(const DocChunk& chunk);

  std::size_t chunk_size_;
  Bm25Params params_;
  std::vector<DocChunk> chunks_;
  std::vector<std::uint32_t> chunk_lengths_;  // normalized term counts
  std::map<std::string, std::vector<Posting>> index_;
  std::unordered_set<std::string> doc_ids_;
  std::uint64_t total_length_ = 0;
  std::size_t skipped_records_ = 0;
};

struct IngestSummary {
  std::size_t records = 0;
  std::size_t skipped_empty = 0;
  std::size_t chunks = 0;
  std::size_t terms = 0;
};

// Reads line-delimited JSON records with string fields id, title, text.
// Blank lines are ignored. Throws IngestError on malformed lines.
std::vector<CorpusRecord> read_corpus_jsonl(std::istream& in);

Corpus ingest_corpus(const std::vector<CorpusRecord>& records,
                     std::size_t chunk_size = kDefaultChunkSize,
                     Bm25Params params = {});

// Loads either a persisted index or a JSONL corpus, deciding by content.
Corpus load_corpus_file(const std::string& path,
                        std::size_t chunk_size = kDefaultChunkSize);

// `<documents>[Doc 1: title] body\n[Doc 2: title] body</documents>`
std::string format_documents_block(const SearchResult& result);

struct DocumentEntry {
  int rank = 0;
  std::string title;
  std::string body;
};

// Inverse of format_documents_block; accepts the block with or without its
// enclosing tags.
std::vector<DocumentEntry> parse_documents_block(std::string_view block);

}  // namespace hieragent
