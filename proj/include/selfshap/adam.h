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

namespace selfshap {

/// Adam with bias correction over one flat parameter vector.
class AdamState {
 public:
  AdamState() = default;
  AdamState(std::size_t n_params, double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
            double eps = 1e-8);

  /// In-place update; `params` and `grads` must match the state size.
  void step(double* params, const double* grads, std::size_t n);

  std::int64_t step_count() const { return t_; }
  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

 private:
  std::vector<double> m_, v_;
  std::int64_t t_ = 0;
  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
};

}  // namespace selfshap
