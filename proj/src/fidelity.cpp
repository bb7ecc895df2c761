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
#include "selfshap/fidelity.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "selfshap/parallel.h"

namespace selfshap {

namespace {

std::size_t argmax_row(const double* v, std::size_t d) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < d; ++j) {
    if (v[j] > v[best]) best = j;
  }
  return best;
}

/// Predicted class per row; binary thresholds the single output at 0.5
/// post-link (0 on the logit scale for the identity link).
std::size_t predicted_class(const ForwardOut& fo, std::size_t row, LinkKind) {
  std::size_t d = fo.pred.cols();
  if (d == 1) {
    // 0.5 splits sigmoid probabilities and identity outputs trained to 0/1.
    return fo.pred(row, 0) >= 0.5 ? 1 : 0;
  }
  return argmax_row(fo.pred.row_ptr(row), d);
}

double monotonic_seconds() {
  auto now = std::chrono::steady_clock::now().time_since_epoch();
  return std::chrono::duration<double>(now).count();
}

}  // namespace

FidelityResult explanation_fidelity(ShapNetwork& net, const Tensor& instances,
                                    const FidelityOptions& opt) {
  std::size_t rows = instances.rows();
  std::size_t n = net.n_features(), d = net.n_outputs();
  if (rows == 0) throw std::invalid_argument("explanation_fidelity: no instances");

  ForwardOut fo = net.forward(instances, RunMode::kEval);

  FidelityResult res;
  res.oracle_estimates.resize(rows);
  res.predicted_class.resize(rows);
  std::vector<std::vector<double>> attr(rows);
  std::vector<char> ok(rows, 0);  // plain bytes: slots are written concurrently

  parallel_chunks(rows, 1, [&](std::size_t, std::size_t b, std::size_t) {
    std::size_t cls = d == 1 ? 0 : predicted_class(fo, b, net.spec().link);
    res.predicted_class[b] = cls;
    std::vector<double> x(instances.row_ptr(b), instances.row_ptr(b) + n);
    KernelShapConfig cfg = opt.oracle;
    cfg.seed = opt.oracle.seed ^ (0x9e3779b97f4a7c15ULL * (b + 1));
    BatchGame game = model_game(net, x, cls, opt.vf);
    res.oracle_estimates[b] = unbiased_kernelshap(game, n, cfg);
    ok[b] = (res.oracle_estimates[b].converged || !opt.drop_unconverged) ? 1 : 0;
    const double* phi = fo.phi.row_ptr(b);
    attr[b].resize(n);
    for (std::size_t i = 0; i < n; ++i) attr[b][i] = phi[i * d + cls];
  });

  std::vector<bool> ok_mask(rows);
  for (std::size_t b = 0; b < rows; ++b) ok_mask[b] = ok[b] != 0;
  FidelityResult scored = score_attributions(attr, res.oracle_estimates, ok_mask);
  scored.oracle_estimates = std::move(res.oracle_estimates);
  scored.predicted_class = std::move(res.predicted_class);
  return scored;
}

FidelityResult score_attributions(const std::vector<std::vector<double>>& attributions,
                                  const std::vector<ShapleyEstimate>& oracle,
                                  const std::vector<bool>& converged_mask) {
  if (attributions.size() != oracle.size() || oracle.size() != converged_mask.size()) {
    throw std::invalid_argument("score_attributions: size mismatch");
  }
  std::vector<double> cs, sp, r2;
  std::size_t dropped = 0;
  for (std::size_t b = 0; b < oracle.size(); ++b) {
    if (!converged_mask[b]) {
      ++dropped;
      continue;
    }
    cs.push_back(cosine_similarity(oracle[b].values, attributions[b]));
    sp.push_back(spearman(oracle[b].values, attributions[b]));
    r2.push_back(r_squared(oracle[b].values, attributions[b]));
  }
  FidelityResult res;
  res.cosine = MetricReport::from_values("cosine", std::move(cs));
  res.spearman_rank = MetricReport::from_values("spearman", std::move(sp));
  res.r2 = MetricReport::from_values("r2", std::move(r2));
  res.dropped = dropped;
  return res;
}

Curves inclusion_exclusion_curve(ShapNetwork& net, const Tensor& instances,
                                 const std::vector<double>& labels,
                                 const std::vector<double>& fractions, const ValueFunction& vf) {
  std::size_t rows = instances.rows();
  std::size_t n = net.n_features(), d = net.n_outputs();
  if (rows != labels.size()) throw std::invalid_argument("inclusion_exclusion_curve: size mismatch");
  vf.validate(n);
  if (vf.kind != ValueFunctionKind::kBaselineRemoval) {
    throw std::invalid_argument("inclusion_exclusion_curve: baseline removal only");
  }

  ForwardOut fo = net.forward(instances, RunMode::kEval);

  // Feature order by |attribution| for the predicted class, descending.
  std::vector<std::vector<std::size_t>> order(rows, std::vector<std::size_t>(n));
  for (std::size_t b = 0; b < rows; ++b) {
    std::size_t cls = d == 1 ? 0 : predicted_class(fo, b, net.spec().link);
    const double* phi = fo.phi.row_ptr(b);
    auto& ord = order[b];
    std::iota(ord.begin(), ord.end(), std::size_t{0});
    std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t c) {
      return std::fabs(phi[a * d + cls]) > std::fabs(phi[c * d + cls]);
    });
  }

  Curves curves;
  curves.fractions = fractions;
  Tensor masked = Tensor::matrix(rows, n);
  for (double f : fractions) {
    auto keep = static_cast<std::size_t>(std::llround(f * static_cast<double>(n)));
    keep = std::min(keep, n);

    for (int mode = 0; mode < 2; ++mode) {  // 0: inclusion, 1: exclusion
      for (std::size_t b = 0; b < rows; ++b) {
        CoalitionMask m(n);
        for (std::size_t i = 0; i < keep; ++i) m.set(order[b][i]);
        if (mode == 1) m = m.complement();
        apply_mask_row(instances.row_ptr(b), m, vf.baseline.data(), masked.row_ptr(b), n);
      }
      ForwardOut fm = net.forward(masked, RunMode::kEval);
      std::size_t correct = 0;
      for (std::size_t b = 0; b < rows; ++b) {
        std::size_t cls = predicted_class(fm, b, net.spec().link);
        if (static_cast<double>(cls) == labels[b]) ++correct;
      }
      double acc = static_cast<double>(correct) / static_cast<double>(rows);
      (mode == 0 ? curves.inclusion : curves.exclusion).push_back(acc);
    }
  }
  return curves;
}

TimingResult benchmark_timing(ShapNetwork& net, const Tensor& instances, const ValueFunction& vf,
                              const KernelShapConfig& oracle_cfg, int runs) {
  std::size_t rows = instances.rows();
  std::size_t n = net.n_features(), d = net.n_outputs();
  if (rows < 100) throw std::invalid_argument("benchmark_timing: needs at least 100 instances");

  // Warm-up pass.
  (void)net.forward(instances, RunMode::kEval);

  std::vector<double> amortized;
  for (int r = 0; r < runs; ++r) {
    double t0 = monotonic_seconds();
    ForwardOut fo = net.forward(instances, RunMode::kEval);
    double t1 = monotonic_seconds();
    if (!fo.phi.all_finite()) throw std::runtime_error("benchmark_timing: non-finite output");
    amortized.push_back(t1 - t0);
  }
  std::sort(amortized.begin(), amortized.end());
  double amortized_median = amortized[amortized.size() / 2];

  ForwardOut fo = net.forward(instances, RunMode::kEval);
  double t0 = monotonic_seconds();
  parallel_chunks(rows, 1, [&](std::size_t, std::size_t b, std::size_t) {
    std::size_t cls = d == 1 ? 0 : predicted_class(fo, b, net.spec().link);
    std::vector<double> x(instances.row_ptr(b), instances.row_ptr(b) + n);
    KernelShapConfig cfg = oracle_cfg;
    cfg.seed = oracle_cfg.seed ^ (0x9e3779b97f4a7c15ULL * (b + 1));
    (void)unbiased_kernelshap(model_game(net, x, cls, vf), n, cfg);
  });
  double oracle_time = monotonic_seconds() - t0;

  TimingResult res;
  res.amortized_seconds = amortized_median;
  res.oracle_seconds = oracle_time;
  res.instances = rows;
  res.amortized_per_instance = amortized_median / static_cast<double>(rows);
  res.oracle_per_instance = oracle_time / static_cast<double>(rows);
  return res;
}

}  // namespace selfshap
