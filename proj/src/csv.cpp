/*
 * Copyright 2026 The SelfSHAP Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <algorithm>
#include <charconv>
#include <fstream>
#include <stdexcept>

#include "selfshap/data.h"

namespace selfshap {

namespace {

bool parse_double(const std::string& s, double* out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
  if (begin == end) return false;
  auto [ptr, ec] = std::from_chars(begin, end, *out);
  return ec == std::errc() && ptr == end;
}

// Splits one CSV record; quoted fields may contain commas, newlines were
// already joined by the reader, and doubled quotes unescape.
std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (ch == '\r') {
      // swallow CR of CRLF endings
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

bool has_unclosed_quote(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') {
      if (quoted && i + 1 < line.size() && line[i + 1] == '"') {
        ++i;
      } else {
        quoted = !quoted;
      }
    }
  }
  return quoted;
}

}  // namespace

std::pair<RawTable, DatasetSchema> load_csv(const std::string& path,
                                            const std::map<std::string, std::string>& hints,
                                            const std::vector<std::string>& missing_markers) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path);

  RawTable table;
  std::string line;
  std::size_t line_no = 0;

  auto next_record = [&](std::string* out) {
    if (!std::getline(in, line)) return false;
    ++line_no;
    while (has_unclosed_quote(line)) {
      std::string more;
      if (!std::getline(in, more)) break;
      ++line_no;
      line += "\n" + more;
    }
    *out = line;
    return true;
  };

  std::string record;
  if (!next_record(&record)) throw std::runtime_error("load_csv: empty file " + path);
  table.header = split_record(record);
  std::size_t width = table.header.size();

  auto is_missing = [&](const std::string& cell) {
    return std::find(missing_markers.begin(), missing_markers.end(), cell) !=
           missing_markers.end();
  };

  while (next_record(&record)) {
    if (record.empty() && in.eof()) break;
    auto fields = split_record(record);
    if (fields.size() != width) {
      throw std::runtime_error("load_csv: line " + std::to_string(line_no) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(width));
    }
    std::vector<bool> miss(width, false);
    for (std::size_t c = 0; c < width; ++c) miss[c] = is_missing(fields[c]);
    table.cells.push_back(std::move(fields));
    table.missing.push_back(std::move(miss));
  }
  if (table.rows() == 0) throw std::runtime_error("load_csv: no data rows in " + path);

  DatasetSchema schema;
  schema.columns.resize(width);
  std::optional<std::size_t> label_col;
  for (std::size_t c = 0; c < width; ++c) {
    schema.columns[c].name = table.header[c];
    auto hint = hints.find(table.header[c]);
    if (hint != hints.end()) {
      if (hint->second == "label") {
        schema.columns[c].kind = ColumnKind::kLabel;
        label_col = c;
      } else if (hint->second == "numeric") {
        schema.columns[c].kind = ColumnKind::kNumeric;
      } else if (hint->second == "categorical") {
        schema.columns[c].kind = ColumnKind::kCategorical;
      } else {
        throw std::runtime_error("load_csv: unknown column hint '" + hint->second + "' for " +
                                 table.header[c]);
      }
      continue;
    }
    if (table.header[c] == "label") {
      schema.columns[c].kind = ColumnKind::kLabel;
      label_col = c;
      continue;
    }
    // Numeric when at least 99% of the non-missing cells parse.
    std::size_t parsed = 0, seen = 0;
    for (std::size_t r = 0; r < table.rows(); ++r) {
      if (table.missing[r][c]) continue;
      ++seen;
      double v;
      if (parse_double(table.cells[r][c], &v)) ++parsed;
    }
    bool numeric = seen > 0 && static_cast<double>(parsed) >= 0.99 * static_cast<double>(seen);
    schema.columns[c].kind = numeric ? ColumnKind::kNumeric : ColumnKind::kCategorical;
    // Cells that fail the numeric parse in a numeric column count as missing.
    if (numeric && parsed < seen) {
      for (std::size_t r = 0; r < table.rows(); ++r) {
        double v;
        if (!table.missing[r][c] && !parse_double(table.cells[r][c], &v)) {
          table.missing[r][c] = true;
        }
      }
    }
  }
  if (!label_col.has_value()) {
    throw std::runtime_error("load_csv: no label column (hint one or name it 'label')");
  }
  schema.label_column = *label_col;
  return {std::move(table), std::move(schema)};
}

}  // namespace selfshap
