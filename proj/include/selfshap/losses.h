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

#include "selfshap/network.h"
#include "selfshap/shapley.h"

namespace selfshap {

enum class TaskKind { kBinary, kMulticlass, kRegression };

std::string to_string(TaskKind t);
TaskKind task_from_string(const std::string& s);

/// Which output columns enter the coalition loss: every output, or only the
/// labelled class.
enum class ShapleyLossOutputs { kAll, kTrueClass };

/// Loss on one post-link prediction row. Binary expects d == 1 and a 0/1
/// target; multiclass expects a class index below d; regression is squared
/// error. Logs are clamped at 1e-12.
double prediction_loss(const double* prediction, std::size_t d, double target, TaskKind task);

/// Loss and its gradient with respect to the logits, for the trainer.
/// The gradient has the usual closed forms: (p - y) for sigmoid+BCE and
/// softmax+CE, 2 (p - t) / d for the identity link with squared error.
double prediction_loss_grad(const double* prediction, const double* /*logits*/, std::size_t d,
                            double target, TaskKind task, LinkKind link, double* grad_logits);

/// Checks that a task/link combination is one the losses support.
void validate_task_link(TaskKind task, LinkKind link, std::size_t d);

/// Mean squared coalition residual of `net` at one instance over the given
/// masks: mean over masks and outputs of
///   (g_j(x^S) - g_j(0) - 1_S . phi_j(x))^2
/// where g_j is the logit column sum before the bias, so the value is
/// invariant to the bias term exactly. With `efficiency_normalization` the
/// phi used in the residual is shifted so its column sums match
/// g_j(x) - g_j(0).
double shapley_loss_value(ShapNetwork& net, const std::vector<double>& x,
                          const std::vector<CoalitionMask>& masks, const ValueFunction& vf,
                          bool efficiency_normalization = false,
                          ShapleyLossOutputs outputs = ShapleyLossOutputs::kAll,
                          std::size_t true_class = 0);

}  // namespace selfshap
