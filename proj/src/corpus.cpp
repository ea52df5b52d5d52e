// Copyright 2026 The hapax-mcmc Authors.
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

#include "hapax/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "hapax/error.hpp"
#include "hapax/parallel.hpp"

namespace hapax {
namespace {

constexpr UChar32 kRightSingleQuote = 0x2019;

bool is_apostrophe(UChar32 c) { return c == '\'' || c == kRightSingleQuote; }

void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  U8_APPEND_UNSAFE(buf, len, c);
  out.append(buf, static_cast<std::size_t>(len));
}

// Decodes at `pos`; returns a negative code point on malformed input.
UChar32 decode(std::string_view s, int32_t& pos) {
  UChar32 c;
  U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), pos,
          static_cast<int32_t>(s.size()), c);
  return c;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError(path.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IngestionError(path.string(), "read failed");
  return std::move(ss).str();
}

}  // namespace

std::vector<std::string> tokenize(std::string_view raw_text,
                                  std::string_view source) {
  if (raw_text.size() > static_cast<std::size_t>(INT32_MAX))
    throw IngestionError(std::string(source), "file too large");
  std::vector<std::string> tokens;
  std::string current;
  int32_t pos = 0;
  const auto end = static_cast<int32_t>(raw_text.size());
  while (pos < end) {
    const int32_t at = pos;
    const UChar32 c = decode(raw_text, pos);
    if (c < 0) {
      throw IngestionError(std::string(source),
                           "invalid UTF-8 at byte " + std::to_string(at));
    }
    if (u_isalpha(c)) {
      append_utf8(current, u_tolower(c));
      continue;
    }
    if (is_apostrophe(c) && !current.empty() && pos < end) {
      int32_t peek = pos;
      const UChar32 next = decode(raw_text, peek);
      if (next >= 0 && u_isalpha(next)) {
        current.push_back('\'');
        continue;
      }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> extract_document_hapaxes(const Document& doc) {
  std::unordered_map<std::string_view, std::uint32_t> counts;
  counts.reserve(doc.tokens.size());
  for (const auto& t : doc.tokens) ++counts[t];
  std::vector<std::string> hapaxes;
  for (const auto& t : doc.tokens) {
    if (counts[t] == 1) hapaxes.push_back(t);
  }
  return hapaxes;
}

HapaxTable HapaxTable::from_entries(std::vector<HapaxEntry> entries) {
  if (entries.empty()) throw EmptyTableError("hapax table has no entries");
  std::sort(entries.begin(), entries.end(),
            [](const HapaxEntry& a, const HapaxEntry& b) {
              return a.ordinal_rank < b.ordinal_rank;
            });
  HapaxTable table;
  table.index_.reserve(entries.size());
  int prev_dense = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const HapaxEntry& e = entries[i];
    const std::string where = "hapax table entry '" + e.word + "'";
    if (e.word.empty()) throw ConsistencyError("hapax table: empty word");
    if (e.frequency == 0) throw ConsistencyError(where + ": zero frequency");
    if (e.ordinal_rank != static_cast<int>(i + 1))
      throw ConsistencyError(where + ": ordinal ranks must be 1..n");
    if (i == 0) {
      if (e.dense_rank != 1) throw ConsistencyError(where + ": dense ranks must start at 1");
    } else {
      const HapaxEntry& p = entries[i - 1];
      if (e.frequency > p.frequency)
        throw ConsistencyError(where + ": frequencies must not increase with rank");
      if (e.frequency == p.frequency) {
        if (e.dense_rank != p.dense_rank)
          throw ConsistencyError(where + ": equal frequencies need equal dense ranks");
        if (!(p.word < e.word))
          throw ConsistencyError(where + ": ties must be ordered by word");
      } else if (e.dense_rank != p.dense_rank + 1) {
        throw ConsistencyError(where + ": dense ranks must be contiguous");
      }
    }
    if (!table.index_.emplace(e.word, i).second)
      throw ConsistencyError(where + ": duplicate word");
    table.total_occurrences_ += e.frequency;
    prev_dense = e.dense_rank;
  }
  table.alphabet_size_ = prev_dense;
  table.entries_ = std::move(entries);
  return table;
}

const HapaxEntry* HapaxTable::find(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  return it == index_.end() ? nullptr : &entries_[it->second];
}

void RankSequence::validate() const {
  if (alphabet_size < 1) throw DomainError("rank sequence: alphabet size must be >= 1");
  for (const int v : values) {
    if (v < 1 || v > alphabet_size)
      throw DomainError("rank sequence: value " + std::to_string(v) +
                        " outside [1, " + std::to_string(alphabet_size) + "]");
  }
}

HapaxTable build_hapax_table(std::span<const Document> corpus) {
  if (corpus.empty()) throw DomainError("build_hapax_table: no documents");
  std::vector<std::vector<std::string>> per_doc(corpus.size());
  parallel_for(corpus.size(), [&](std::size_t i) {
    per_doc[i] = extract_document_hapaxes(corpus[i]);
  });

  std::unordered_map<std::string, std::uint64_t> freq;
  for (const auto& hapaxes : per_doc) {
    for (const auto& w : hapaxes) ++freq[w];
  }
  if (freq.empty()) throw EmptyTableError("corpus contains no hapax legomena");

  std::vector<HapaxEntry> entries;
  entries.reserve(freq.size());
  for (auto& [word, f] : freq) entries.push_back({word, f, 0, 0});
  std::sort(entries.begin(), entries.end(),
            [](const HapaxEntry& a, const HapaxEntry& b) {
              if (a.frequency != b.frequency) return a.frequency > b.frequency;
              return a.word < b.word;
            });
  int dense = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i == 0 || entries[i].frequency != entries[i - 1].frequency) ++dense;
    entries[i].dense_rank = dense;
    entries[i].ordinal_rank = static_cast<int>(i + 1);
  }
  return HapaxTable::from_entries(std::move(entries));
}

RankSequence build_rank_sequence(std::span<const Document> corpus,
                                 const HapaxTable& table) {
  std::vector<const Document*> ordered;
  ordered.reserve(corpus.size());
  for (const auto& d : corpus) ordered.push_back(&d);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const Document* a, const Document* b) {
                     return a->order_index < b->order_index;
                   });

  RankSequence seq;
  seq.alphabet_size = table.alphabet_size();
  seq.values.reserve(table.total_occurrences());
  for (const Document* doc : ordered) {
    for (const auto& w : extract_document_hapaxes(*doc)) {
      const HapaxEntry* e = table.find(w);
      if (e == nullptr) {
        throw ConsistencyError("document '" + doc->id + "': hapax '" + w +
                               "' is missing from the hapax table");
      }
      seq.values.push_back(e->dense_rank);
    }
  }
  return seq;
}

std::vector<Document> load_corpus(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    throw IngestionError(dir.string(), "not a directory");

  std::vector<fs::path> files;
  const fs::path manifest = dir / "manifest.txt";
  if (fs::exists(manifest)) {
    std::istringstream lines(read_file(manifest));
    std::string line;
    while (std::getline(lines, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ' ||
                               line.back() == '\t'))
        line.pop_back();
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == '#') continue;
      const fs::path p = dir / line.substr(first);
      if (!fs::is_regular_file(p))
        throw IngestionError(manifest.string(), "listed file not found: " + p.string());
      files.push_back(p);
    }
  } else {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".txt")
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) {
                return a.filename().string() < b.filename().string();
              });
  }
  if (files.empty()) throw IngestionError(dir.string(), "no documents");

  std::vector<Document> docs(files.size());
  parallel_for(files.size(), [&](std::size_t i) {
    docs[i].id = files[i].stem().string();
    docs[i].order_index = i;
    docs[i].tokens = tokenize(read_file(files[i]), files[i].string());
  });
  return docs;
}

}  // namespace hapax
