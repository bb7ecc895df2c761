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
#include "selfshap/gradcheck.h"

#include <cmath>
#include <stdexcept>

namespace selfshap {

double gradient_check(ShapNetwork& net, const LossFn& loss, const GradFn& grad, double step) {
  if (!(step > 0.0) || step > 1e-3) {
    throw std::invalid_argument("gradient_check: step must be in (0, 1e-3]");
  }
  std::vector<double> analytic = grad(net);
  auto views = net.param_views();

  double worst = 0.0;
  std::size_t flat = 0;
  for (auto& v : views) {
    for (std::size_t i = 0; i < v.size; ++i, ++flat) {
      double saved = v.data[i];
      v.data[i] = saved + step;
      double up = loss(net);
      v.data[i] = saved - step;
      double down = loss(net);
      v.data[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw std::runtime_error("gradient_check: non-finite loss perturbing " + v.name + "[" +
                                 std::to_string(i) + "]");
      }
      double numeric = (up - down) / (2.0 * step);
      double a = analytic[flat];
      double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
      double err = std::fabs(a - numeric) / denom;
      if (err > worst) worst = err;
    }
  }
  return worst;
}

}  // namespace selfshap
