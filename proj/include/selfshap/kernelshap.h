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

#include <functional>

#include "selfshap/shapley.h"

namespace selfshap {

struct KernelShapConfig {
  std::size_t batch = 256;          // game evaluations per round
  double tolerance = 0.01;          // relative to the spread of current estimates
  std::size_t max_samples = 1000000;
  bool antithetic = true;           // evaluate each sampled S together with its complement
  std::uint64_t seed = 0;
};

struct ShapleyEstimate {
  std::vector<double> values;
  std::vector<double> std_errors;
  std::size_t samples_used = 0;
  bool converged = false;
};

/// Monte-Carlo estimate of the constrained weighted-least-squares solution.
/// The second-moment matrix of kernel-distributed masks is known in closed
/// form, so only the mask-value cross moment is sampled; the estimate is then
/// a fixed linear map of an unbiased sample mean and converges to the exact
/// Shapley values. The efficiency constraint (values summing to
/// v(N) - v(empty)) is enforced exactly at every round.
///
/// `on_round`, when set, observes the running estimate after each batch.
ShapleyEstimate unbiased_kernelshap(
    const BatchGame& game, std::size_t n, const KernelShapConfig& cfg,
    const std::function<void(const ShapleyEstimate&)>& on_round = nullptr);

}  // namespace selfshap
