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

#include <cstdint>
#include <functional>
#include <vector>

#include "selfshap/network.h"
#include "selfshap/rng.h"
#include "selfshap/tensor.h"

namespace selfshap {

/// Feature subset S as a fixed-width bitset with cached cardinality.
class CoalitionMask {
 public:
  CoalitionMask() = default;
  explicit CoalitionMask(std::size_t n);
  static CoalitionMask full(std::size_t n);
  static CoalitionMask from_bits(std::size_t n, std::uint64_t bits);  // n <= 64

  std::size_t n() const { return n_; }
  std::size_t cardinality() const { return card_; }
  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1ULL; }
  void set(std::size_t i);
  void reset(std::size_t i);
  CoalitionMask complement() const;

  bool operator==(const CoalitionMask& o) const { return n_ == o.n_ && words_ == o.words_; }

 private:
  std::size_t n_ = 0;
  std::size_t card_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Coalition-size weight from the weighted-least-squares kernel:
///   w(n, s) = (n - 1) / (C(n, s) * s * (n - s)).
/// Computed in log space above n = 30 to avoid overflowing the binomial.
/// s must lie in [1, n-1]; the boundary sizes have infinite weight and are
/// handled by the efficiency constraint instead.
double shapley_kernel_weight(std::size_t n, std::size_t s);

/// Draws subsets with probability proportional to the kernel over subsets:
/// size s first with p(s) proportional to (n-1)/(s(n-s)) (the binomial in the
/// kernel cancels against the number of size-s subsets), then a uniform
/// s-subset. Never yields the empty or the full set.
class KernelSampler {
 public:
  KernelSampler(std::size_t n, Rng rng);

  CoalitionMask sample();
  std::size_t sample_size();
  /// Uniform subset of exactly s features (1 <= s <= n-1).
  CoalitionMask sample_of_size(std::size_t s);

  std::size_t n() const { return n_; }
  /// Normalized size distribution p(s), s = 1..n-1 (index 0 unused).
  const std::vector<double>& size_probs() const { return probs_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> probs_;  // p(s), index s
  std::vector<double> cdf_;
  Rng rng_;
  std::vector<std::uint32_t> scratch_;
};

enum class ValueFunctionKind { kBaselineRemoval, kMarginalExpectation };

std::string to_string(ValueFunctionKind k);
ValueFunctionKind value_function_from_string(const std::string& s);

/// How masked-out features are filled before a model evaluation.
struct ValueFunction {
  ValueFunctionKind kind = ValueFunctionKind::kBaselineRemoval;
  std::vector<double> baseline;  // length n; all zeros in preprocessed space
  Tensor background;             // [m, n] rows used by the marginal kind

  static ValueFunction baseline_removal(std::size_t n);
  static ValueFunction baseline_removal(std::vector<double> baseline);
  static ValueFunction marginal(Tensor background_rows);

  std::size_t background_count() const { return background.rows(); }
  void validate(std::size_t n) const;
};

/// Fills the features outside S. Baseline removal yields one row; the
/// marginal kind yields one row per background instance (the caller averages
/// the model outputs).
Tensor apply_mask(const std::vector<double>& x, const CoalitionMask& mask,
                  const ValueFunction& vf);

/// In-place masking of one row into `out` using the baseline fill.
void apply_mask_row(const double* x, const CoalitionMask& mask, const double* baseline,
                    double* out, std::size_t n);

using Game = std::function<double(const CoalitionMask&)>;
/// Evaluates many coalitions at once; lets model-backed games batch their
/// forward passes.
using BatchGame = std::function<std::vector<double>(const std::vector<CoalitionMask>&)>;

BatchGame batch_of(const Game& game);

/// Exact Shapley values by full subset enumeration (n <= 20). The returned
/// values satisfy sum(phi) == v(N) - v(empty) to rounding.
std::vector<double> exact_shapley(const Game& game, std::size_t n);

/// Additive per-output shift so column j of phi sums exactly to target[j].
void efficiency_normalize(AttributionMatrix& phi, const std::vector<double>& target);
void efficiency_normalize_column(double* column, std::size_t n, double target, std::size_t stride);

/// Builds the coalition game v(S) = logit_j of `net` on the masked instance
/// (marginal kind: averaged over background rows).
BatchGame model_game(ShapNetwork& net, const std::vector<double>& x, std::size_t output,
                     const ValueFunction& vf);

}  // namespace selfshap
