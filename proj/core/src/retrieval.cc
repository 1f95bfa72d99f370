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

#include "hieragent/retrieval.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "hieragent/error.h"
#include "hieragent/tag_protocol.h"
#include "hieragent/tokenizer.h"

namespace hieragent {

namespace {

constexpr std::string_view kIndexFormat = "hieragent-index";

std::string join_tokens(const std::vector<std::string>& tokens,
                        std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace

std::vector<std::string> normalize_terms(std::string_view text) {
  std::vector<std::string> out;
  std::string term;
  auto flush = [&] {
    if (!term.empty()) out.push_back(std::move(term));
    term.clear();
  };
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isspace(u)) {
      flush();
    } else if (u < 0x80 && std::ispunct(u)) {
      continue;
    } else {
      term += static_cast<char>(std::tolower(u));
    }
  }
  flush();
  return out;
}

Corpus::Corpus(std::size_t chunk_size, Bm25Params params)
    : chunk_size_(chunk_size), params_(params) {
  if (chunk_size_ == 0) throw ConfigError("chunk_size must be positive");
}

void Corpus::index_chunk(const DocChunk& chunk) {
  std::map<std::string, std::uint32_t> tf;
  const auto terms = normalize_terms(chunk.title + " " + chunk.body);
  for (const auto& t : terms) ++tf[t];
  for (const auto& [term, n] : tf) {
    index_[term].push_back(Posting{chunk.chunk_id, n});
  }
  chunk_lengths_.push_back(static_cast<std::uint32_t>(terms.size()));
  total_length_ += terms.size();
}

bool Corpus::add_record(const CorpusRecord& record) {
  if (doc_ids_.count(record.id) > 0) {
    throw IngestError("duplicate document id: " + record.id);
  }
  const auto tokens = WhitespaceTokenizer{}.split(record.text);
  if (tokens.empty()) {
    ++skipped_records_;
    return false;
  }
  doc_ids_.insert(record.id);
  for (std::size_t begin = 0; begin < tokens.size(); begin += chunk_size_) {
    const std::size_t end = std::min(tokens.size(), begin + chunk_size_);
    DocChunk chunk{static_cast<ChunkId>(chunks_.size()), record.title,
                   join_tokens(tokens, begin, end), record.id};
    index_chunk(chunk);
    chunks_.push_back(std::move(chunk));
  }
  return true;
}

Corpus Corpus::from_chunks(std::vector<DocChunk> chunks, std::size_t chunk_size,
                           Bm25Params params) {
  Corpus c(chunk_size, params);
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    if (chunks[i].chunk_id != i) {
      throw IngestError("chunk ids must be dense and ordered; found " +
                        std::to_string(chunks[i].chunk_id) + " at position " +
                        std::to_string(i));
    }
    c.doc_ids_.insert(chunks[i].source_doc_id);
    c.index_chunk(chunks[i]);
  }
  c.chunks_ = std::move(chunks);
  return c;
}

std::size_t Corpus::document_frequency(const std::string& term) const {
  const auto it = index_.find(term);
  return it == index_.end() ? 0 : it->second.size();
}

double Corpus::average_chunk_length() const {
  return chunks_.empty() ? 0.0
                         : static_cast<double>(total_length_) /
                               static_cast<double>(chunks_.size());
}

SearchResult Corpus::search(std::string_view query, std::size_t top_k) const {
  SearchResult out;
  if (top_k == 0 || chunks_.empty()) return out;

  auto terms = normalize_terms(query);
  std::vector<std::string> unique;
  for (auto& t : terms) {
    if (std::find(unique.begin(), unique.end(), t) == unique.end()) {
      unique.push_back(std::move(t));
    }
  }

  const double n = static_cast<double>(chunks_.size());
  const double avgdl = average_chunk_length();
  std::vector<double> scores(chunks_.size(), 0.0);
  std::vector<ChunkId> touched;
  for (const auto& term : unique) {
    const auto it = index_.find(term);
    if (it == index_.end()) continue;
    const double df = static_cast<double>(it->second.size());
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    for (const auto& p : it->second) {
      const double tf = p.term_frequency;
      const double len = chunk_lengths_[p.chunk_id];
      const double norm =
          params_.k1 * (1.0 - params_.b + params_.b * len / avgdl);
      if (scores[p.chunk_id] == 0.0) touched.push_back(p.chunk_id);
      scores[p.chunk_id] += idf * tf * (params_.k1 + 1.0) / (tf + norm);
    }
  }

  std::sort(touched.begin(), touched.end(), [&](ChunkId a, ChunkId b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  const std::size_t keep = std::min(top_k, touched.size());
  out.ranked.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    out.ranked.push_back({chunks_[touched[i]], scores[touched[i]]});
  }
  return out;
}

void Corpus::save(std::ostream& out) const {
  nlohmann::ordered_json j;
  j["format"] = kIndexFormat;
  j["version"] = kIndexFormatVersion;
  j["chunk_size"] = chunk_size_;
  j["bm25"] = {{"k1", params_.k1}, {"b", params_.b}};
  j["skipped_records"] = skipped_records_;
  auto& chunks = j["chunks"] = nlohmann::ordered_json::array();
  for (const auto& c : chunks_) {
    chunks.push_back({{"chunk_id", c.chunk_id},
                      {"source_doc_id", c.source_doc_id},
                      {"title", c.title},
                      {"body", c.body}});
  }
  auto& postings = j["postings"] = nlohmann::ordered_json::object();
  for (const auto& [term, list] : index_) {
    auto& arr = postings[term] = nlohmann::ordered_json::array();
    for (const auto& p : list) arr.push_back({p.chunk_id, p.term_frequency});
  }
  out << j.dump() << '\n';
}

Corpus Corpus::load(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IngestError(std::string("unreadable index: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kIndexFormat) {
    throw IngestError("not a hieragent index file");
  }
  if (j.value("version", -1) != kIndexFormatVersion) {
    throw IngestError("unsupported index version " +
                      j.value("version", nlohmann::json(-1)).dump());
  }
  std::vector<DocChunk> chunks;
  for (const auto& c : j.at("chunks")) {
    chunks.push_back(DocChunk{c.at("chunk_id").get<ChunkId>(),
                              c.at("title").get<std::string>(),
                              c.at("body").get<std::string>(),
                              c.at("source_doc_id").get<std::string>()});
  }
  Bm25Params params{j.at("bm25").at("k1").get<double>(),
                    j.at("bm25").at("b").get<double>()};
  Corpus corpus = from_chunks(std::move(chunks),
                              j.at("chunk_size").get<std::size_t>(), params);
  corpus.skipped_records_ = j.value("skipped_records", std::size_t{0});

  std::map<std::string, std::vector<Posting>> stored;
  for (const auto& [term, list] : j.at("postings").items()) {
    auto& dst = stored[term];
    for (const auto& p : list) {
      dst.push_back(Posting{p.at(0).get<ChunkId>(), p.at(1).get<std::uint32_t>()});
    }
  }
  if (stored != corpus.index_) {
    throw IngestError("index postings disagree with stored chunks");
  }
  return corpus;
}

std::vector<CorpusRecord> read_corpus_jsonl(std::istream& in) {
  std::vector<CorpusRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back(CorpusRecord{j.at("id").get<std::string>(),
                                 j.value("title", std::string{}),
                                 j.at("text").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw IngestError("corpus line " + std::to_string(lineno) + ": " +
                        e.what());
    }
  }
  return out;
}

Corpus ingest_corpus(const std::vector<CorpusRecord>& records,
                     std::size_t chunk_size, Bm25Params params) {
  Corpus corpus(chunk_size, params);
  for (const auto& r : records) corpus.add_record(r);
  return corpus;
}

Corpus load_corpus_file(const std::string& path, std::size_t chunk_size) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open corpus file: " + path);
  std::string first;
  std::getline(in, first);
  in.clear();
  in.seekg(0);
  if (first.find("\"format\":\"hieragent-index\"") != std::string::npos ||
      first.find("\"format\": \"hieragent-index\"") != std::string::npos) {
    return Corpus::load(in);
  }
  return ingest_corpus(read_corpus_jsonl(in), chunk_size);
}

std::string format_documents_block(const SearchResult& result) {
  std::string out = open_tag(TagKind::Documents);
  for (std::size_t i = 0; i < result.ranked.size(); ++i) {
    const auto& c = result.ranked[i].chunk;
    if (i > 0) out += '\n';
    out += "[Doc " + std::to_string(i + 1) + ": " + neutralize_tags(c.title) +
           "] " + neutralize_tags(c.body);
  }
  out += close_tag(TagKind::Documents);
  return out;
}

std::vector<DocumentEntry> parse_documents_block(std::string_view block) {
  const std::string open = open_tag(TagKind::Documents);
  const std::string close = close_tag(TagKind::Documents);
  std::string_view text = block;
  if (text.substr(0, open.size()) == open) text.remove_prefix(open.size());
  if (text.size() >= close.size() &&
      text.substr(text.size() - close.size()) == close) {
    text.remove_suffix(close.size());
  }

  // Entry headers sit at the start of the block or of a line.
  auto header_at = [&](std::size_t pos, DocumentEntry& e,
                       std::size_t& body_start) {
    if (text.substr(pos, 5) != "[Doc ") return false;
    std::size_t p = pos + 5;
    int rank = 0;
    const std::size_t digits = p;
    while (p < text.size() && std::isdigit(static_cast<unsigned char>(text[p]))) {
      rank = rank * 10 + (text[p] - '0');
      ++p;
    }
    if (p == digits || text.substr(p, 2) != ": ") return false;
    p += 2;
    const std::size_t close_bracket = text.find(']', p);
    if (close_bracket == std::string_view::npos) return false;
    e.rank = rank;
    e.title = std::string(text.substr(p, close_bracket - p));
    body_start = close_bracket + 1;
    if (body_start < text.size() && text[body_start] == ' ') ++body_start;
    return true;
  };

  std::vector<DocumentEntry> out;
  std::vector<std::size_t> body_starts;
  std::vector<std::size_t> header_starts;
  for (std::size_t pos = 0; pos < text.size();) {
    DocumentEntry e;
    std::size_t body_start = 0;
    if ((pos == 0 || text[pos - 1] == '\n') && header_at(pos, e, body_start)) {
      out.push_back(std::move(e));
      header_starts.push_back(pos);
      body_starts.push_back(body_start);
      pos = body_start;
      continue;
    }
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::size_t end =
        i + 1 < out.size() ? header_starts[i + 1] - 1 : text.size();
    if (end < body_starts[i]) end = body_starts[i];
    out[i].body = std::string(text.substr(body_starts[i], end - body_starts[i]));
  }
  return out;
}

}  // namespace hieragent
