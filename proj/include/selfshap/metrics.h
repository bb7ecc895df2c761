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

#include <string>
#include <vector>

#include "selfshap/tensor.h"

namespace selfshap {

struct MetricReport {
  std::string name;
  std::vector<double> per_instance;
  double mean = 0.0;
  double stddev = 0.0;

  static MetricReport from_values(std::string name, std::vector<double> values);
};

/// Mann-Whitney AUC with midrank tie handling. Both classes must be present.
double auc_binary(const std::vector<double>& scores, const std::vector<double>& labels);

/// One-vs-rest AUC per class, weighted by class support. Classes without
/// positives are skipped (recorded in *skipped when given); all-skipped is an
/// error.
double auc_weighted_ovr(const Tensor& scores, const std::vector<double>& labels,
                        std::vector<std::size_t>* skipped = nullptr);

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);
double spearman(const std::vector<double>& a, const std::vector<double>& b);
double r_squared(const std::vector<double>& truth, const std::vector<double>& approx);

}  // namespace selfshap
