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
#include <cmath>
#include <set>
#include <stdexcept>

#include "selfshap/data.h"

namespace selfshap {

namespace {

double parse_numeric_cell(const std::string& s) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw std::runtime_error("preprocess: cell is not numeric: '" + s + "'");
  }
  return v;
}

std::vector<std::size_t> feature_column_ids(const DatasetSchema& schema) {
  std::vector<std::size_t> ids;
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    if (schema.columns[c].kind != ColumnKind::kLabel) ids.push_back(c);
  }
  return ids;
}

}  // namespace

Preprocessor Preprocessor::fit(const RawTable& table, const DatasetSchema& schema,
                               const std::vector<std::size_t>& train_rows) {
  if (train_rows.empty()) throw std::invalid_argument("Preprocessor::fit: empty training split");
  Preprocessor prep;
  auto feat_cols = feature_column_ids(schema);
  prep.columns_.resize(feat_cols.size());

  for (std::size_t f = 0; f < feat_cols.size(); ++f) {
    std::size_t c = feat_cols[f];
    Column& col = prep.columns_[f];
    col.name = schema.columns[c].name;
    col.kind = schema.columns[c].kind;

    if (col.kind == ColumnKind::kCategorical) {
      // Categories sorted lexicographically, tokens from 1 (0 = missing).
      std::set<std::string> cats;
      for (std::size_t r : train_rows) {
        if (!table.missing[r][c]) cats.insert(table.cells[r][c]);
      }
      double token = 1.0;
      for (const auto& cat : cats) col.tokens[cat] = token++;
    }

    double sum = 0.0, sum2 = 0.0;
    std::size_t count = 0;
    for (std::size_t r : train_rows) {
      if (table.missing[r][c]) continue;
      double v = col.kind == ColumnKind::kCategorical
                     ? col.tokens.at(table.cells[r][c])
                     : parse_numeric_cell(table.cells[r][c]);
      sum += v;
      sum2 += v * v;
      ++count;
    }
    if (count == 0) {
      col.mean = 0.0;
      col.stdev = 1.0;
      col.constant = true;
      prep.warnings_.push_back("column '" + col.name + "' has no observed training values");
      continue;
    }
    col.mean = sum / static_cast<double>(count);
    double var = sum2 / static_cast<double>(count) - col.mean * col.mean;
    if (var <= 1e-24) {
      col.stdev = 1.0;
      col.constant = true;
      prep.warnings_.push_back("column '" + col.name + "' is constant; std clamped to 1");
    } else {
      col.stdev = std::sqrt(var);
    }
  }
  return prep;
}

Tensor Preprocessor::transform(const RawTable& table, const std::vector<std::size_t>& rows) const {
  // Find the feature columns again from the table header order: the fitted
  // columns were stored in that order with the label skipped.
  std::vector<std::size_t> feat_cols;
  feat_cols.reserve(columns_.size());
  for (std::size_t c = 0, f = 0; c < table.cols() && f < columns_.size(); ++c) {
    if (table.header[c] == columns_[f].name) {
      feat_cols.push_back(c);
      ++f;
    }
  }
  if (feat_cols.size() != columns_.size()) {
    throw std::runtime_error("Preprocessor::transform: table does not match fitted schema");
  }

  Tensor X = Tensor::matrix(rows.size(), columns_.size());
  for (std::size_t ri = 0; ri < rows.size(); ++ri) {
    std::size_t r = rows[ri];
    double* xr = X.row_ptr(ri);
    for (std::size_t f = 0; f < columns_.size(); ++f) {
      std::size_t c = feat_cols[f];
      const Column& col = columns_[f];
      if (table.missing[r][c]) {
        xr[f] = 0.0;  // masked representation == baseline
        continue;
      }
      if (col.kind == ColumnKind::kCategorical) {
        auto it = col.tokens.find(table.cells[r][c]);
        if (it == col.tokens.end()) {
          xr[f] = 0.0;  // unseen category -> reserved token -> baseline
        } else {
          xr[f] = (it->second - col.mean) / col.stdev;
        }
      } else {
        xr[f] = (parse_numeric_cell(table.cells[r][c]) - col.mean) / col.stdev;
      }
    }
  }
  return X;
}

double Preprocessor::inverse_standardize(std::size_t feature, double value) const {
  const Column& col = columns_.at(feature);
  return value * col.stdev + col.mean;
}

std::vector<std::string> Preprocessor::feature_names() const {
  std::vector<std::string> names;
  names.reserve(columns_.size());
  for (const auto& c : columns_) names.push_back(c.name);
  return names;
}

LabelCodec LabelCodec::fit(const RawTable& table, const DatasetSchema& schema, TaskKind task) {
  LabelCodec codec;
  codec.task = task;
  if (task == TaskKind::kRegression) return codec;
  std::set<std::string> classes;
  std::size_t c = schema.label_column;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (table.missing[r][c]) throw std::runtime_error("labels may not be missing");
    classes.insert(table.cells[r][c]);
  }
  codec.classes.assign(classes.begin(), classes.end());
  if (task == TaskKind::kBinary && codec.classes.size() != 2) {
    throw std::runtime_error("binary task needs exactly 2 label values, found " +
                             std::to_string(codec.classes.size()));
  }
  if (task == TaskKind::kMulticlass && codec.classes.size() < 2) {
    throw std::runtime_error("multiclass task needs at least 2 label values");
  }
  return codec;
}

std::vector<double> LabelCodec::encode(const RawTable& table, const DatasetSchema& schema,
                                       const std::vector<std::size_t>& rows) const {
  std::vector<double> y(rows.size());
  std::size_t c = schema.label_column;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string& cell = table.cells[rows[i]][c];
    if (task == TaskKind::kRegression) {
      y[i] = parse_numeric_cell(cell);
    } else {
      auto it = std::lower_bound(classes.begin(), classes.end(), cell);
      if (it == classes.end() || *it != cell) {
        throw std::runtime_error("unknown label value '" + cell + "'");
      }
      y[i] = static_cast<double>(it - classes.begin());
    }
  }
  return y;
}

}  // namespace selfshap
