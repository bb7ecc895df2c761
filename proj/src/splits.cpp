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
#include <cmath>
#include <map>
#include <stdexcept>

#include "selfshap/data.h"

namespace selfshap {

namespace {

void seeded_shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = rng.uniform_int(i);
    std::swap(v[i - 1], v[j]);
  }
}

void allocate(const std::vector<std::size_t>& pool, double train_frac, double val_frac,
              SplitSet* out) {
  std::size_t n = pool.size();
  auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(n)));
  auto n_val = static_cast<std::size_t>(std::llround(val_frac * static_cast<double>(n)));
  n_train = std::min(n_train, n);
  n_val = std::min(n_val, n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n_train) {
      out->train.push_back(pool[i]);
    } else if (i < n_train + n_val) {
      out->val.push_back(pool[i]);
    } else {
      out->test.push_back(pool[i]);
    }
  }
}

}  // namespace

SplitSet make_splits(std::size_t rows, double train_frac, double val_frac, double test_frac,
                     std::uint64_t seed, bool stratify, const std::vector<double>* labels) {
  if (std::fabs(train_frac + val_frac + test_frac - 1.0) > 1e-9) {
    throw std::invalid_argument("make_splits: fractions must sum to 1");
  }
  if (stratify && (labels == nullptr || labels->size() != rows)) {
    throw std::invalid_argument("make_splits: stratification needs labels");
  }

  SplitSet out;
  out.seed = seed;
  Rng rng(seed);

  if (!stratify) {
    std::vector<std::size_t> pool(rows);
    for (std::size_t i = 0; i < rows; ++i) pool[i] = i;
    seeded_shuffle(pool, rng);
    allocate(pool, train_frac, val_frac, &out);
  } else {
    std::map<double, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < rows; ++i) by_class[(*labels)[i]].push_back(i);
    for (auto& [cls, pool] : by_class) {
      Rng class_rng = rng.split(static_cast<std::uint64_t>(cls));
      seeded_shuffle(pool, class_rng);
      allocate(pool, train_frac, val_frac, &out);
    }
    // Keep downstream batching independent of the class grouping order.
    Rng mix = rng.split(0x5eedULL);
    seeded_shuffle(out.train, mix);
    seeded_shuffle(out.val, mix);
    seeded_shuffle(out.test, mix);
  }

  if (out.train.empty() || out.val.empty() || out.test.empty()) {
    throw std::invalid_argument("make_splits: a split came out empty; adjust fractions");
  }
  return out;
}

}  // namespace selfshap
