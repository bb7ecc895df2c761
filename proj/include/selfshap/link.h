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

#include "selfshap/tensor.h"

namespace selfshap {

enum class LinkKind { kIdentity, kSigmoid, kSoftmax };

std::string to_string(LinkKind k);
LinkKind link_from_string(const std::string& s);

double stable_sigmoid(double x);

/// Applies the link row-wise. Softmax subtracts the row max before
/// exponentiating, so logits up to |1e4| stay in range; each softmax row sums
/// to 1 within 1e-12.
Tensor stable_link(const Tensor& logits, LinkKind link);

/// In-place variant over one row of `d` values.
void stable_link_row(const double* logits, double* out, std::size_t d, LinkKind link);

}  // namespace selfshap
