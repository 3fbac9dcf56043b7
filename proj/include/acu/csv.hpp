// Copyright 2026 The Acurisk Authors. All Rights Reserved.
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

#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "acu/util.hpp"

namespace acu {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(std::string_view name) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
  int require_column(std::string_view name) const {
    int c = column(name);
    if (c < 0)
      throw std::invalid_argument("missing required column: " +
                                  std::string(name));
    return c;
  }
};

// RFC 4180 quoting; \n and \r\n both accepted as row separators.
inline CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool row_started = false;
  auto end_field = [&]() {
    row.push_back(field);
    field.clear();
  };
  auto end_row = [&]() {
    end_field();
    if (table.header.empty())
      table.header = std::move(row);
    else
      table.rows.push_back(std::move(row));
    row = {};
    row_started = false;
  };
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        row_started = true;
        break;
      case ',':
        end_field();
        row_started = true;
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        break;
      default:
        field += c;
        row_started = true;
    }
  }
  if (in_quotes) throw std::invalid_argument("csv: unterminated quote");
  if (row_started || !field.empty() || !row.empty()) end_row();
  for (size_t r = 0; r < table.rows.size(); ++r)
    if (table.rows[r].size() != table.header.size())
      throw std::invalid_argument(
          "csv: row " + std::to_string(r + 2) + " has " +
          std::to_string(table.rows[r].size()) + " fields, expected " +
          std::to_string(table.header.size()));
  return table;
}

inline CsvTable read_csv(const std::string& path) {
  return parse_csv(read_file(path));
}

inline std::string csv_escape(std::string_view field) {
  bool needs = field.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header)
      : width_(header.size()) {
    append_row(header);
  }
  void append_row(const std::vector<std::string>& fields) {
    if (fields.size() != width_)
      throw std::invalid_argument("csv writer: wrong field count");
    for (size_t i = 0; i < fields.size(); ++i) {
      if (i) buf_ += ',';
      buf_ += csv_escape(fields[i]);
    }
    buf_ += '\n';
  }
  const std::string& str() const { return buf_; }
  void save(const std::string& path) const { write_file(path, buf_); }

 private:
  size_t width_;
  std::string buf_;
};

inline double parse_double_field(const std::string& s,
                                 std::string_view what) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw std::invalid_argument("bad numeric field for " + std::string(what) +
                                ": '" + s + "'");
  return v;
}

inline int parse_int_field(const std::string& s, std::string_view what) {
  char* end = nullptr;
  long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0')
    throw std::invalid_argument("bad integer field for " + std::string(what) +
                                ": '" + s + "'");
  return static_cast<int>(v);
}

}  // namespace acu
