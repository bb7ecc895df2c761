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
#include "selfshap/losses.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace selfshap {

namespace {
constexpr double kLogClamp = 1e-12;

double clamped_log(double p) { return std::log(std::max(p, kLogClamp)); }
}  // namespace

std::string to_string(TaskKind t) {
  switch (t) {
    case TaskKind::kBinary: return "binary";
    case TaskKind::kMulticlass: return "multiclass";
    case TaskKind::kRegression: return "regression";
  }
  return "binary";
}

TaskKind task_from_string(const std::string& s) {
  if (s == "binary") return TaskKind::kBinary;
  if (s == "multiclass") return TaskKind::kMulticlass;
  if (s == "regression") return TaskKind::kRegression;
  throw std::invalid_argument("unknown task: " + s);
}

void validate_task_link(TaskKind task, LinkKind link, std::size_t d) {
  switch (task) {
    case TaskKind::kBinary:
      if (d != 1) throw std::invalid_argument("binary task needs a single output");
      if (link == LinkKind::kSoftmax) throw std::invalid_argument("binary task: use sigmoid or identity");
      break;
    case TaskKind::kMulticlass:
      if (d < 2) throw std::invalid_argument("multiclass task needs at least 2 outputs");
      if (link == LinkKind::kSigmoid) throw std::invalid_argument("multiclass task: use softmax or identity");
      break;
    case TaskKind::kRegression:
      if (link != LinkKind::kIdentity) throw std::invalid_argument("regression task: identity link only");
      break;
  }
}

double prediction_loss(const double* prediction, std::size_t d, double target, TaskKind task) {
  switch (task) {
    case TaskKind::kBinary: {
      double y = target;
      if (y != 0.0 && y != 1.0) throw std::invalid_argument("prediction_loss: binary target must be 0 or 1");
      double p = prediction[0];
      return -(y * clamped_log(p) + (1.0 - y) * clamped_log(1.0 - p));
    }
    case TaskKind::kMulticlass: {
      auto cls = static_cast<std::size_t>(target);
      if (target < 0 || cls >= d) {
        throw std::invalid_argument("prediction_loss: class index out of range");
      }
      return -clamped_log(prediction[cls]);
    }
    case TaskKind::kRegression: {
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        double r = prediction[j] - target;
        acc += r * r;
      }
      return acc / static_cast<double>(d);
    }
  }
  return 0.0;
}

double prediction_loss_grad(const double* prediction, const double*, std::size_t d, double target,
                            TaskKind task, LinkKind link, double* grad_logits) {
  if (link == LinkKind::kIdentity) {
    // Squared error against the (one-hot) target works for every task when no
    // link squashes the outputs.
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      double t;
      if (task == TaskKind::kRegression) {
        t = target;
      } else if (task == TaskKind::kBinary) {
        t = target;
      } else {
        t = (static_cast<std::size_t>(target) == j) ? 1.0 : 0.0;
      }
      double r = prediction[j] - t;
      acc += r * r;
      grad_logits[j] = 2.0 * r / static_cast<double>(d);
    }
    return acc / static_cast<double>(d);
  }
  if (task == TaskKind::kBinary) {
    double y = target;
    double p = prediction[0];
    grad_logits[0] = p - y;
    return -(y * clamped_log(p) + (1.0 - y) * clamped_log(1.0 - p));
  }
  // softmax + cross-entropy
  auto cls = static_cast<std::size_t>(target);
  if (target < 0 || cls >= d) throw std::invalid_argument("prediction_loss: class index out of range");
  for (std::size_t j = 0; j < d; ++j) {
    grad_logits[j] = prediction[j] - (j == cls ? 1.0 : 0.0);
  }
  return -clamped_log(prediction[cls]);
}

double shapley_loss_value(ShapNetwork& net, const std::vector<double>& x,
                          const std::vector<CoalitionMask>& masks, const ValueFunction& vf,
                          bool efficiency_normalization, ShapleyLossOutputs outputs,
                          std::size_t true_class) {
  std::size_t n = net.n_features(), d = net.n_outputs();
  if (x.size() != n) throw std::invalid_argument("shapley_loss: instance length mismatch");
  vf.validate(n);

  auto colsums = [&](const Tensor& X) {
    ForwardOut fo = net.forward(X, RunMode::kEval);
    std::vector<double> g(d, 0.0);
    std::size_t rows = fo.phi.rows();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* pr = fo.phi.row_ptr(r);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) g[j] += pr[i * d + j];
      }
    }
    for (double& v : g) v /= static_cast<double>(rows);
    return g;
  };

  std::vector<double> g0 = colsums(apply_mask(x, CoalitionMask(n), vf));

  Tensor X = Tensor::row(x);
  ForwardOut fx = net.forward(X, RunMode::kEval);
  std::vector<double> phi(fx.phi.data(), fx.phi.data() + n * d);
  if (efficiency_normalization) {
    for (std::size_t j = 0; j < d; ++j) {
      double shift = -g0[j] / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) phi[i * d + j] += shift;
    }
  }

  double acc = 0.0;
  std::size_t terms = 0;
  for (const auto& mask : masks) {
    std::vector<double> gS = colsums(apply_mask(x, mask, vf));
    for (std::size_t j = 0; j < d; ++j) {
      if (outputs == ShapleyLossOutputs::kTrueClass && j != true_class) continue;
      double masked_sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask.test(i)) masked_sum += phi[i * d + j];
      }
      double r = gS[j] - g0[j] - masked_sum;
      acc += r * r;
      ++terms;
    }
  }
  return terms == 0 ? 0.0 : acc / static_cast<double>(terms);
}

}  // namespace selfshap
