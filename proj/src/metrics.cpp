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
#include "selfshap/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace selfshap {

namespace {

/// Average ranks (1-based) with midranks for ties.
std::vector<double> midranks(const std::vector<double>& v) {
  std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  std::size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double xa = a[i] - ma, xb = b[i] - mb;
    num += xa * xb;
    da += xa * xa;
    db += xb * xb;
  }
  if (da <= 0.0 || db <= 0.0) {
    throw std::invalid_argument("correlation undefined for zero-variance input");
  }
  return num / std::sqrt(da * db);
}

}  // namespace

MetricReport MetricReport::from_values(std::string name, std::vector<double> values) {
  MetricReport r;
  r.name = std::move(name);
  r.per_instance = std::move(values);
  if (r.per_instance.empty()) return r;
  double sum = 0.0;
  for (double v : r.per_instance) sum += v;
  r.mean = sum / static_cast<double>(r.per_instance.size());
  double ss = 0.0;
  for (double v : r.per_instance) ss += (v - r.mean) * (v - r.mean);
  r.stddev = std::sqrt(ss / static_cast<double>(r.per_instance.size()));
  return r;
}

double auc_binary(const std::vector<double>& scores, const std::vector<double>& labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw std::invalid_argument("auc_binary: size mismatch");
  }
  std::size_t n_pos = 0;
  for (double y : labels) {
    if (y == 1.0) ++n_pos;
  }
  std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument("auc_binary: both classes must be present");
  }
  std::vector<double> ranks = midranks(scores);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1.0) rank_sum += ranks[i];
  }
  double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double auc_weighted_ovr(const Tensor& scores, const std::vector<double>& labels,
                        std::vector<std::size_t>* skipped) {
  std::size_t rows = scores.rows(), d = scores.cols();
  if (rows != labels.size()) throw std::invalid_argument("auc_weighted_ovr: size mismatch");
  if (d < 2) throw std::invalid_argument("auc_weighted_ovr: needs at least 2 classes");

  double weighted = 0.0;
  std::size_t total_support = 0;
  for (std::size_t c = 0; c < d; ++c) {
    std::size_t support = 0;
    for (double y : labels) {
      if (static_cast<std::size_t>(y) == c) ++support;
    }
    if (support == 0 || support == rows) {
      if (skipped != nullptr) skipped->push_back(c);
      continue;
    }
    std::vector<double> s(rows), onehot(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      s[r] = scores(r, c);
      onehot[r] = static_cast<std::size_t>(labels[r]) == c ? 1.0 : 0.0;
    }
    weighted += auc_binary(s, onehot) * static_cast<double>(support);
    total_support += support;
  }
  if (total_support == 0) {
    throw std::invalid_argument("auc_weighted_ovr: no class had both positives and negatives");
  }
  return weighted / static_cast<double>(total_support);
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("cosine_similarity: vectors must match with length >= 2");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na <= 0.0 || nb <= 0.0) {
    throw std::invalid_argument("cosine_similarity: zero-norm vector");
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("spearman: vectors must match with length >= 2");
  }
  return pearson(midranks(a), midranks(b));
}

double r_squared(const std::vector<double>& truth, const std::vector<double>& approx) {
  if (truth.size() != approx.size() || truth.size() < 2) {
    throw std::invalid_argument("r_squared: vectors must match with length >= 2");
  }
  double mean = 0.0;
  for (double v : truth) mean += v;
  mean /= static_cast<double>(truth.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_res += (truth[i] - approx[i]) * (truth[i] - approx[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  if (ss_tot <= 0.0) throw std::invalid_argument("r_squared: zero-variance truth");
  return 1.0 - ss_res / ss_tot;
}

}  // namespace selfshap
