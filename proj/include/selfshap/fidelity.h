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

#include "selfshap/kernelshap.h"
#include "selfshap/metrics.h"
#include "selfshap/network.h"
#include "selfshap/shapley.h"

namespace selfshap {

struct FidelityOptions {
  KernelShapConfig oracle;
  ValueFunction vf;
  bool drop_unconverged = true;
};

struct FidelityResult {
  MetricReport cosine;
  MetricReport spearman_rank;
  MetricReport r2;
  std::size_t dropped = 0;  // instances whose oracle never converged
  std::vector<ShapleyEstimate> oracle_estimates;
  std::vector<std::size_t> predicted_class;
};

/// Ground-truth comparison per instance: the oracle explains the model's own
/// masking game for the predicted class, and the model's matching attribution
/// column is scored against it (cosine / Spearman / R^2). Instances whose
/// oracle fails to converge are dropped and counted. Runs data-parallel
/// across instances with per-instance oracle seeds.
FidelityResult explanation_fidelity(ShapNetwork& net, const Tensor& instances,
                                    const FidelityOptions& opt);

/// Same scoring against caller-provided attribution rows (used to evaluate a
/// separate explainer against the oracle values of the same model game).
FidelityResult score_attributions(const std::vector<std::vector<double>>& attributions,
                                  const std::vector<ShapleyEstimate>& oracle,
                                  const std::vector<bool>& converged_mask);

struct Curves {
  std::vector<double> fractions;
  std::vector<double> inclusion;  // accuracy keeping the top-f fraction
  std::vector<double> exclusion;  // accuracy masking the top-f fraction
};

/// Ranks features per instance by |attribution| for the predicted class; at
/// each fraction the top features are kept (inclusion) or masked (exclusion)
/// and the accuracy of the resulting predictions is recorded.
Curves inclusion_exclusion_curve(ShapNetwork& net, const Tensor& instances,
                                 const std::vector<double>& labels,
                                 const std::vector<double>& fractions, const ValueFunction& vf);

struct TimingResult {
  double amortized_seconds = 0.0;  // one forward pass per instance, total
  double oracle_seconds = 0.0;     // unbiased estimator per instance, total
  std::size_t instances = 0;
  double amortized_per_instance = 0.0;
  double oracle_per_instance = 0.0;
};

/// Wall-clock comparison (monotonic clock, median of `runs` for the
/// amortized side, single timed pass for the oracle side) after a warm-up.
TimingResult benchmark_timing(ShapNetwork& net, const Tensor& instances, const ValueFunction& vf,
                              const KernelShapConfig& oracle_cfg, int runs = 5);

}  // namespace selfshap
