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

#include "hapax/io.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include <openssl/evp.h>

#include "hapax/error.hpp"

namespace hapax::io {
namespace {

template <typename T>
T parse_number(std::string_view field, const std::string& source, std::size_t line) {
  T value{};
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw IngestionError(source, "line " + std::to_string(line) + ": bad number '" +
                                     std::string(field) + "'");
  }
  return value;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    start = end + 1;
  }
  return out;
}

void expect_header(std::string_view got, std::string_view want, const std::string& source) {
  if (got != want)
    throw IngestionError(source, "expected header '" + std::string(want) + "'");
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IngestionError(tmp.string(), "cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IngestionError(tmp.string(), "write failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IngestionError(path.string(), "rename failed: " + ec.message());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError(path.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  std::string hex;
  hex.reserve(2 * len);
  static constexpr char kDigits[] = "0123456789abcdef";
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kDigits[md[i] >> 4]);
    hex.push_back(kDigits[md[i] & 0xf]);
  }
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_text(path)); }

std::string format_double(double x) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) throw Error("format_double failed");
  return std::string(buf.data(), ptr);
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string format_hapax_table(const HapaxTable& table) {
  std::string out = "word,frequency,dense_rank,ordinal_rank\n";
  for (const auto& e : table.entries()) {
    out += e.word;
    out += ',';
    out += std::to_string(e.frequency);
    out += ',';
    out += std::to_string(e.dense_rank);
    out += ',';
    out += std::to_string(e.ordinal_rank);
    out += '\n';
  }
  return out;
}

HapaxTable parse_hapax_table(std::string_view csv, const std::string& source) {
  const auto lines = lines_of(csv);
  if (lines.empty()) throw IngestionError(source, "empty file");
  expect_header(lines[0], "word,frequency,dense_rank,ordinal_rank", source);
  std::vector<HapaxEntry> entries;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split_csv_line(lines[i]);
    if (f.size() != 4)
      throw IngestionError(source, "line " + std::to_string(i + 1) + ": expected 4 fields");
    entries.push_back({std::string(f[0]), parse_number<std::uint64_t>(f[1], source, i + 1),
                       parse_number<int>(f[2], source, i + 1),
                       parse_number<int>(f[3], source, i + 1)});
  }
  try {
    return HapaxTable::from_entries(std::move(entries));
  } catch (const ConsistencyError& e) {
    throw IngestionError(source, e.what());
  }
}

std::string format_rank_sequence(std::span<const int> values) {
  std::string out;
  out.reserve(values.size() * 4);
  for (const int v : values) {
    out += std::to_string(v);
    out += '\n';
  }
  return out;
}

RankSequence parse_rank_sequence(std::string_view text, const std::string& source) {
  RankSequence seq;
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const int v = parse_number<int>(lines[i], source, i + 1);
    if (v < 1) throw IngestionError(source, "line " + std::to_string(i + 1) + ": rank must be >= 1");
    seq.values.push_back(v);
    seq.alphabet_size = std::max(seq.alphabet_size, v);
  }
  if (seq.values.empty()) throw IngestionError(source, "no ranks");
  return seq;
}

std::vector<RankSizePoint> parse_points(std::string_view csv, const std::string& source) {
  const auto lines = lines_of(csv);
  if (lines.empty()) throw IngestionError(source, "empty file");
  expect_header(lines[0], "rank,size", source);
  std::vector<RankSizePoint> pts;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split_csv_line(lines[i]);
    if (f.size() != 2)
      throw IngestionError(source, "line " + std::to_string(i + 1) + ": expected 2 fields");
    pts.push_back({parse_number<int>(f[0], source, i + 1), parse_number<double>(f[1], source, i + 1)});
  }
  return pts;
}

std::vector<RankSizePoint> table_points(const HapaxTable& table) {
  std::vector<RankSizePoint> pts;
  pts.reserve(table.entries().size());
  for (const auto& e : table.entries())
    pts.push_back({e.ordinal_rank, static_cast<double>(e.frequency)});
  return pts;
}

std::string format_target(const TargetDistribution& target) {
  std::string out = "rank,prob\n";
  for (int r = 1; r <= target.r_bar(); ++r) {
    out += std::to_string(r);
    out += ',';
    out += format_double(target.prob(r));
    out += '\n';
  }
  return out;
}

}  // namespace hapax::io
