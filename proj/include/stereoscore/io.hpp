// Copyright 2026 The stereoscore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// File plumbing shared by every module: RFC 4180 CSV, JSON Lines, and the
// text normalization used for exact matching.

#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace stereoscore {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Text

std::string trim(std::string_view s);

// Unicode NFC normalization followed by whitespace trimming. Invalid UTF-8
// is passed through trimmed but otherwise untouched.
std::string normalize_text(std::string_view s);

std::string to_lower_ascii(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

// Formats with a fixed number of decimals ("%.4f").
std::string format_fixed(double value, int decimals);

// Shortest representation that parses back to the same double.
std::string format_exact(double value);

// Strict parse of a whole field; throws FormatError naming `what`.
double parse_double(std::string_view field, std::string_view what);
long long parse_int(std::string_view field, std::string_view what);

// ---------------------------------------------------------------------------
// CSV

class CsvTable {
 public:
  CsvTable() = default;
  CsvTable(std::vector<std::string> header,
           std::vector<std::vector<std::string>> rows);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  std::optional<std::size_t> column(std::string_view name) const;
  // Throws FormatError naming the missing column.
  std::size_t require_column(std::string_view name) const;

  // Cell or empty string when the row is short.
  const std::string& cell(std::size_t row, std::size_t col) const;

  // First line of data is line 2 (line 1 is the header).
  static std::size_t line_of(std::size_t row) { return row + 2; }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

CsvTable parse_csv(std::string_view text, char sep = ',');
CsvTable read_csv(const std::filesystem::path& path, char sep = ',');

std::string csv_escape(std::string_view field, char sep = ',');
std::string csv_line(const std::vector<std::string>& fields, char sep = ',');

// ---------------------------------------------------------------------------
// Files

std::string read_file(const std::filesystem::path& path);
// Writes atomically enough for our purposes: temp file then rename.
void write_file(const std::filesystem::path& path, std::string_view content);

// Calls `fn(json, line_number)` for each non-blank line. Parse errors are
// rethrown as FormatError carrying the 1-based line number.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const Json&, std::size_t)>& fn);

std::string to_jsonl_line(const Json& record);

}  // namespace stereoscore
