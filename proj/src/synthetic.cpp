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
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "selfshap/data.h"

namespace selfshap {

SyntheticData make_synthetic_binary(std::size_t rows, std::uint64_t seed) {
  constexpr std::size_t kFeatures = 8;
  SyntheticData data;
  data.X = Tensor::matrix(rows, kFeatures);
  data.y.resize(rows);
  for (std::size_t f = 0; f < kFeatures; ++f) {
    data.feature_names.push_back("f" + std::to_string(f));
  }
  Rng rng(seed);
  for (std::size_t r = 0; r < rows; ++r) {
    double* x = data.X.row_ptr(r);
    for (std::size_t f = 0; f < kFeatures; ++f) x[f] = rng.normal();
    double score = 1.2 * x[0] - 0.8 * x[1] + 0.6 * x[2] + 0.3 * x[7] +
                   1.5 * x[3] * x[4] - 1.1 * x[5] * x[6];
    data.y[r] = score > 0.0 ? 1.0 : 0.0;
  }
  return data;
}

void write_synthetic_csv(const SyntheticData& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_synthetic_csv: cannot open " + path);
  for (const auto& name : data.feature_names) out << name << ",";
  out << "label\n";
  char buf[64];
  for (std::size_t r = 0; r < data.X.rows(); ++r) {
    for (std::size_t f = 0; f < data.X.cols(); ++f) {
      std::snprintf(buf, sizeof(buf), "%.17g", data.X(r, f));
      out << buf << ",";
    }
    out << static_cast<int>(data.y[r]) << "\n";
  }
}

}  // namespace selfshap
