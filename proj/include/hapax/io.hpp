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

#ifndef HAPAX_IO_HPP_
#define HAPAX_IO_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hapax/corpus.hpp"
#include "hapax/ranksize.hpp"

namespace hapax::io {

// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_text(const std::filesystem::path& path);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// Shortest round-trip decimal form; locale independent.
std::string format_double(double x);

// word,frequency,dense_rank,ordinal_rank
std::string format_hapax_table(const HapaxTable& table);
HapaxTable parse_hapax_table(std::string_view csv, const std::string& source);

// One rank per line.
std::string format_rank_sequence(std::span<const int> values);
RankSequence parse_rank_sequence(std::string_view text, const std::string& source);

// rank,size
std::vector<RankSizePoint> parse_points(std::string_view csv, const std::string& source);
// Ordinal rank against frequency, the rank-size scatter of a table.
std::vector<RankSizePoint> table_points(const HapaxTable& table);

// rank,prob
std::string format_target(const TargetDistribution& target);

// Splits on ',' without quoting rules; fields here never contain commas.
std::vector<std::string_view> split_csv_line(std::string_view line);

}  // namespace hapax::io

#endif  // HAPAX_IO_HPP_
