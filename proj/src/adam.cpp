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
#include "selfshap/adam.h"

#include <cmath>
#include <stdexcept>

namespace selfshap {

AdamState::AdamState(std::size_t n_params, double lr, double beta1, double beta2, double eps)
    : m_(n_params, 0.0), v_(n_params, 0.0), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void AdamState::step(double* params, const double* grads, std::size_t n) {
  if (n != m_.size()) {
    throw std::invalid_argument("AdamState::step: size mismatch");
  }
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < n; ++i) {
    double g = grads[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
    double mhat = m_[i] / bc1;
    double vhat = v_[i] / bc2;
    params[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
  }
}

}  // namespace selfshap
