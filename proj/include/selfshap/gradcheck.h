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

#include "selfshap/network.h"

namespace selfshap {

/// Scalar loss over the current network parameters. Must be a pure function
/// of the parameters (same inputs, no state mutation between calls).
using LossFn = std::function<double(ShapNetwork&)>;

/// Analytic gradient of the same loss, flat layout matching param_views().
using GradFn = std::function<std::vector<double>(ShapNetwork&)>;

/// Central-difference check of `grad` against `loss` over every parameter.
/// Returns max over parameters of
///   |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
/// Throws if the loss is non-finite at a perturbed point, naming the
/// offending parameter.
double gradient_check(ShapNetwork& net, const LossFn& loss, const GradFn& grad, double step);

}  // namespace selfshap
