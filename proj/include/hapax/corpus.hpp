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

#ifndef HAPAX_CORPUS_HPP_
#define HAPAX_CORPUS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hapax {

struct Document {
  std::string id;           // file stem
  std::size_t order_index;  // chronological position, contiguous from 0
  std::vector<std::string> tokens;
};

// Lowercased runs of Unicode letters; an apostrophe (U+0027 or U+2019,
// emitted as U+0027) is kept when it sits between two letters. Everything
// else separates. Throws IngestionError on malformed UTF-8, naming `source`.
std::vector<std::string> tokenize(std::string_view raw_text,
                                  std::string_view source = "<input>");

// Tokens with within-document count 1, in order of appearance.
std::vector<std::string> extract_document_hapaxes(const Document& doc);

struct HapaxEntry {
  std::string word;
  std::uint64_t frequency = 0;  // number of documents where word is a hapax
  int dense_rank = 0;           // shared by equal frequencies, no gaps
  int ordinal_rank = 0;         // bijective; ties broken by word (bytewise)
};

class HapaxTable {
 public:
  // Validates every table invariant; throws ConsistencyError otherwise.
  // Entries may arrive in any order and are stored by ordinal rank.
  static HapaxTable from_entries(std::vector<HapaxEntry> entries);

  const std::vector<HapaxEntry>& entries() const { return entries_; }
  std::uint64_t total_occurrences() const { return total_occurrences_; }
  int alphabet_size() const { return alphabet_size_; }

  // nullptr when the word is not a hapax anywhere in the corpus.
  const HapaxEntry* find(std::string_view word) const;

 private:
  std::vector<HapaxEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  std::uint64_t total_occurrences_ = 0;
  int alphabet_size_ = 0;
};

struct RankSequence {
  std::vector<int> values;  // dense ranks in time order
  int alphabet_size = 0;

  // Throws DomainError unless every value lies in [1, alphabet_size].
  void validate() const;
};

// Throws EmptyTableError when no document contains a hapax.
HapaxTable build_hapax_table(std::span<const Document> corpus);

// Documents in order_index order, hapaxes in first-appearance order, each
// replaced by its dense rank.
RankSequence build_rank_sequence(std::span<const Document> corpus,
                                 const HapaxTable& table);

// Reads every `.txt` file of `dir`, ordered by `manifest.txt` (one file name
// per line) when present and by file name otherwise.
std::vector<Document> load_corpus(const std::filesystem::path& dir);

}  // namespace hapax

#endif  // HAPAX_CORPUS_HPP_
