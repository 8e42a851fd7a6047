// Copyright 2026 The Semixup Lab Authors
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

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace semixup {

/// Minimal RFC 4180 table: header plus rows, all cells as strings.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based file line of each row
};

/// Parses `path`; when `expected_header` is non-empty the header must match
/// exactly. Throws ParseError (with line number) or MissingFile.
CsvTable read_csv(const std::filesystem::path& path, const std::vector<std::string>& expected_header = {});
CsvTable parse_csv(const std::string& text, const std::string& origin,
                   const std::vector<std::string>& expected_header = {});

std::string csv_escape(const std::string& cell);
void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);

double parse_double(const std::string& s);
long long parse_int(const std::string& s);

/// Shortest round-trippable decimal representation.
std::string format_double(double v);

}  // namespace semixup
