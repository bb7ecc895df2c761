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
#include <vector>

#include "selfshap/losses.h"
#include "selfshap/network.h"
#include "selfshap/shapley.h"

namespace selfshap {

struct TrainConfig {
  double beta = 10.0;            // coalition-loss weight
  std::size_t coalitions = 32;   // masks per instance per step
  ValueFunctionKind value_function = ValueFunctionKind::kBaselineRemoval;
  TaskKind task = TaskKind::kBinary;
  bool efficiency_normalization = true;
  bool relaxed = false;          // learnable output bias
  ShapleyLossOutputs shapley_outputs = ShapleyLossOutputs::kAll;
  std::size_t batch_size = 256;
  std::size_t max_epochs = 300;
  std::size_t patience = 10;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  bool oversample_minority = false;
  std::size_t marginal_background = 128;

  void validate() const;
};

struct LossReport {
  double prediction = 0.0;
  double shapley = 0.0;  // unweighted
  double total = 0.0;    // prediction + beta * shapley
  std::size_t epoch = 0;
};

struct EpochLog {
  LossReport train;
  LossReport val;
};

struct TrainResult {
  ShapNetwork net;
  std::vector<EpochLog> epochs;
  std::size_t best_epoch = 0;
};

/// Duplicates minority-class rows (with replacement) until both classes have
/// equal counts. Binary labels only; refuses multiclass label sets.
std::vector<std::size_t> oversample_minority(const std::vector<std::size_t>& train_rows,
                                             const std::vector<double>& labels, Rng rng);

/// Loss (and, when `grads` is non-null, the gradient) of one batch under the
/// dual objective: prediction_loss + beta * coalition loss, averaged over the
/// batch. Masks derive from (cfg.seed, row position), so repeated calls see
/// identical coalitions; with `use_batch_stats` batch-norm uses batch
/// statistics without touching running averages, keeping the function pure.
/// This is the training step's inner computation, exposed so the analytic
/// gradients can be checked against finite differences.
LossReport batch_loss(ShapNetwork& net, const Tensor& x_batch, const std::vector<double>& y_batch,
                      const TrainConfig& cfg, const ValueFunction& vf,
                      std::vector<double>* grads, bool use_batch_stats = false);

/// Trains a self-explaining predictor on preprocessed data. Per batch the
/// loss is prediction_loss + beta * mean squared coalition residual with
/// masks redrawn each epoch from the kernel distribution; optimization is
/// Adam; early stopping tracks the validation total and the best-validation
/// parameters are restored. Deterministic for a fixed seed regardless of the
/// worker count.
TrainResult train(const Tensor& x_train, const std::vector<double>& y_train,
                  const Tensor& x_val, const std::vector<double>& y_val, NetworkSpec spec,
                  const TrainConfig& cfg);

/// Trains a post-hoc amortized explainer against a frozen model: the
/// explainer output is normalized additively and fit to the frozen model's
/// masked logit differences (multiclass targets one uniformly drawn output
/// per sampled mask). Returns the explainer and its per-epoch losses
/// (coalition loss only).
TrainResult train_fastshap(ShapNetwork& blackbox, const Tensor& x_train, const Tensor& x_val,
                           NetworkSpec explainer_spec, const TrainConfig& cfg);

}  // namespace selfshap
