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
#include "selfshap/link.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace selfshap {

std::string to_string(LinkKind k) {
  switch (k) {
    case LinkKind::kIdentity: return "identity";
    case LinkKind::kSigmoid: return "sigmoid";
    case LinkKind::kSoftmax: return "softmax";
  }
  return "identity";
}

LinkKind link_from_string(const std::string& s) {
  if (s == "identity") return LinkKind::kIdentity;
  if (s == "sigmoid") return LinkKind::kSigmoid;
  if (s == "softmax") return LinkKind::kSoftmax;
  throw std::invalid_argument("unknown link: " + s);
}

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

void stable_link_row(const double* logits, double* out, std::size_t d, LinkKind link) {
  switch (link) {
    case LinkKind::kIdentity:
      std::copy(logits, logits + d, out);
      return;
    case LinkKind::kSigmoid:
      for (std::size_t j = 0; j < d; ++j) out[j] = stable_sigmoid(logits[j]);
      return;
    case LinkKind::kSoftmax: {
      double mx = logits[0];
      for (std::size_t j = 1; j < d; ++j) mx = std::max(mx, logits[j]);
      double sum = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        out[j] = std::exp(logits[j] - mx);
        sum += out[j];
      }
      for (std::size_t j = 0; j < d; ++j) out[j] /= sum;
      return;
    }
  }
}

Tensor stable_link(const Tensor& logits, LinkKind link) {
  logits.check_finite("stable_link input");
  Tensor out(logits.shape());
  std::size_t rows = logits.rank() >= 2 ? logits.rows() : 1;
  std::size_t d = logits.rank() >= 2 ? logits.cols() : logits.size();
  for (std::size_t i = 0; i < rows; ++i) {
    stable_link_row(logits.data() + i * d, out.data() + i * d, d, link);
  }
  return out;
}

}  // namespace selfshap
