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
#include "selfshap/tensor.h"

#include <algorithm>
#include <cmath>

namespace selfshap {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t p = 1;
  for (std::size_t d : shape) p *= d;
  return p;
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_product(shape_) != data_.size()) {
    throw std::invalid_argument("Tensor: shape/data size mismatch");
  }
  cols_ = shape_.size() >= 2 ? shape_[1] : (shape_.empty() ? 0 : 1);
}

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {
  cols_ = shape_.size() >= 2 ? shape_[1] : (shape_.empty() ? 0 : 1);
}

Tensor Tensor::row(std::vector<double> values) {
  std::size_t n = values.size();
  return Tensor({1, n}, std::move(values));
}

Tensor Tensor::vec(std::vector<double> values) {
  std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols) { return Tensor({rows, cols}); }

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::check_finite(const std::string& what) const {
  if (!all_finite()) {
    throw std::runtime_error("non-finite value in " + what);
  }
}

}  // namespace selfshap
