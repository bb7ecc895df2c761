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
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "selfshap/losses.h"
#include "selfshap/rng.h"
#include "selfshap/tensor.h"

namespace selfshap {

enum class ColumnKind { kNumeric, kCategorical, kLabel };

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
};

struct DatasetSchema {
  std::vector<ColumnSchema> columns;
  std::size_t label_column = 0;
  std::size_t n_features() const { return columns.size() - 1; }
};

/// Raw parsed table: cells as strings, missing cells empty and flagged.
struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> cells;   // [row][col]
  std::vector<std::vector<bool>> missing;        // [row][col]
  std::size_t rows() const { return cells.size(); }
  std::size_t cols() const { return header.size(); }
};

/// RFC-4180-style CSV with a header row. Column kinds come from `hints`
/// (name -> "numeric" | "categorical" | "label") or, absent a hint, from
/// inference: a column parses as numeric when at least 99% of its non-missing
/// cells do. The label column must be named in hints or called "label".
/// Ragged rows and empty files are errors.
std::pair<RawTable, DatasetSchema> load_csv(const std::string& path,
                                            const std::map<std::string, std::string>& hints,
                                            const std::vector<std::string>& missing_markers = {
                                                "", "?", "NA", "nan"});

struct SplitSet {
  std::vector<std::size_t> train, val, test;
  std::uint64_t seed = 0;
};

/// Seeded shuffle split; stratified allocation keeps per-class proportions
/// within one row when requested. Fractions must sum to 1 and every split
/// must be non-empty.
SplitSet make_splits(std::size_t rows, double train_frac, double val_frac, double test_frac,
                     std::uint64_t seed, bool stratify = false,
                     const std::vector<double>* labels = nullptr);

/// Fitted per-column encoding: categories tokenized from 1 (0 is reserved for
/// missing/unseen), then every column standardized with training-split
/// statistics. Missing cells map to 0 in the transformed space, which is also
/// the masking baseline.
class Preprocessor {
 public:
  struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::kNumeric;
    std::map<std::string, double> tokens;  // category -> token, starting at 1
    double mean = 0.0;
    double stdev = 1.0;
    bool constant = false;
  };

  static Preprocessor fit(const RawTable& table, const DatasetSchema& schema,
                          const std::vector<std::size_t>& train_rows);

  /// Feature matrix for the given rows. Pure function of the fitted state.
  Tensor transform(const RawTable& table, const std::vector<std::size_t>& rows) const;

  /// Undoes standardization for one numeric feature value.
  double inverse_standardize(std::size_t feature, double value) const;

  std::size_t n_features() const { return columns_.size(); }
  const std::vector<Column>& columns() const { return columns_; }
  std::vector<Column>& mutable_columns() { return columns_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  std::vector<std::string> feature_names() const;

 private:
  std::vector<Column> columns_;  // feature columns only, in schema order
  std::vector<std::string> warnings_;
};

/// Label vector for the given rows. Classification labels are tokenized to
/// 0..k-1 by sorted category order (numeric labels must already be integers
/// 0..k-1); regression labels parse as-is.
struct LabelCodec {
  TaskKind task = TaskKind::kBinary;
  std::vector<std::string> classes;  // empty for regression

  static LabelCodec fit(const RawTable& table, const DatasetSchema& schema, TaskKind task);
  std::vector<double> encode(const RawTable& table, const DatasetSchema& schema,
                             const std::vector<std::size_t>& rows) const;
  std::size_t n_classes() const { return classes.size(); }
};

/// Synthetic binary task: standard normal features, label = sign of a fixed
/// linear + pairwise-interaction score. Deterministic per seed.
struct SyntheticData {
  Tensor X;
  std::vector<double> y;
  std::vector<std::string> feature_names;
};
SyntheticData make_synthetic_binary(std::size_t rows, std::uint64_t seed);

/// Writes the synthetic task as a CSV with a trailing label column.
void write_synthetic_csv(const SyntheticData& data, const std::string& path);

}  // namespace selfshap
