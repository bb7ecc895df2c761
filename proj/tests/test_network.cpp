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
#include <gtest/gtest.h>

#include <cmath>

#include "selfshap/gradcheck.h"
#include "selfshap/losses.h"
#include "selfshap/network.h"
#include "selfshap/rng.h"
#include "support.h"

namespace selfshap {
namespace {

using testing::GradCheckSetup;
using testing::make_gradcheck_setup;
using testing::random_rows;
using testing::squared_loss_gradcheck;

NetworkSpec small_spec(BackboneKind kind, std::size_t n = 4, std::size_t d = 2) {
  NetworkSpec spec;
  spec.backbone = kind;
  spec.n_features = n;
  spec.n_outputs = d;
  spec.hidden = {6, 5};
  spec.link = LinkKind::kIdentity;
  return spec;
}

Tensor random_batch(std::size_t rows, std::size_t n, Rng& rng, double scale = 0.8) {
  return random_rows(rows, n, rng, scale);
}

double check_backbone(BackboneKind kind, std::uint64_t seed) {
  GradCheckSetup s = make_gradcheck_setup(kind, seed);
  return squared_loss_gradcheck(s);
}

TEST(Network, LocalAccuracyHoldsByConstruction) {
  // Lemma-style identity: logits equal attribution column sums (+ bias) for
  // random nets and inputs; kept as a regression guard.
  Rng rng(2024);
  const BackboneKind kinds[] = {BackboneKind::kKanSpline, BackboneKind::kKanRbf,
                                BackboneKind::kMlp};
  for (int rep = 0; rep < 1000; ++rep) {
    NetworkSpec spec = small_spec(kinds[rep % 3], 3 + rep % 4, 1 + rep % 3);
    spec.relaxed = rep % 2 == 1;
    Rng net_rng = rng.split(rep);
    ShapNetwork net = ShapNetwork::build(spec, net_rng);
    if (spec.relaxed) net.set_delta(0.3 * net_rng.normal());
    Tensor X = random_batch(1, spec.n_features, net_rng);
    ForwardOut fo = net.forward(X, RunMode::kEval);
    for (std::size_t j = 0; j < spec.n_outputs; ++j) {
      double sum = net.delta();
      for (std::size_t i = 0; i < spec.n_features; ++i) sum += fo.phi(0, i * spec.n_outputs + j);
      ASSERT_LE(std::fabs(fo.logits(0, j) - sum), 1e-9);
    }
  }
}

TEST(Network, ShapeContract) {
  Rng rng(1);
  NetworkSpec spec = small_spec(BackboneKind::kKanSpline, 4, 3);
  ShapNetwork net = ShapNetwork::build(spec, rng);
  AttributionMatrix am = net.explain({0.1, -0.2, 0.3, 0.0});
  EXPECT_EQ(am.n, 4u);
  EXPECT_EQ(am.d, 3u);
  EXPECT_EQ(am.values.size(), 12u);
}

TEST(Network, SigmoidOfZeroPhiIsHalf) {
  Rng rng(1);
  NetworkSpec spec = small_spec(BackboneKind::kKanSpline, 3, 1);
  spec.link = LinkKind::kSigmoid;
  ShapNetwork net = ShapNetwork::build(spec, rng);
  // Zero every parameter: phi == 0, so the sigmoid prediction is exactly 0.5.
  for (auto& v : net.param_views()) std::fill(v.data, v.data + v.size, 0.0);
  Tensor X = Tensor::row({0.5, -0.5, 0.2});
  ForwardOut fo = net.forward(X, RunMode::kEval);
  EXPECT_DOUBLE_EQ(fo.pred(0, 0), 0.5);
}

TEST(Network, InputWidthMismatchThrows) {
  Rng rng(1);
  ShapNetwork net = ShapNetwork::build(small_spec(BackboneKind::kKanSpline), rng);
  Tensor bad = Tensor::matrix(1, 5);
  EXPECT_THROW(net.forward(bad, RunMode::kEval), std::invalid_argument);
}

TEST(Network, BackwardWithoutForwardThrows) {
  Rng rng(1);
  NetworkSpec spec = small_spec(BackboneKind::kKanSpline);
  ShapNetwork net = ShapNetwork::build(spec, rng);
  Tape tape;
  Tensor up = Tensor::matrix(1, spec.n_features * spec.n_outputs);
  std::vector<double> grads(net.param_count(), 0.0);
  EXPECT_THROW(net.backward(tape, up, 0.0, grads), std::runtime_error);

  // A consumed tape cannot be replayed either.
  Tensor X = random_batch(1, spec.n_features, rng);
  net.forward(X, RunMode::kEval, &tape);
  net.backward(tape, up, 0.0, grads);
  EXPECT_THROW(net.backward(tape, up, 0.0, grads), std::runtime_error);
}

TEST(Network, ZeroUpstreamGivesZeroGradients) {
  Rng rng(5);
  NetworkSpec spec = small_spec(BackboneKind::kKanRbf);
  ShapNetwork net = ShapNetwork::build(spec, rng);
  Tape tape;
  Tensor X = random_batch(2, spec.n_features, rng);
  net.forward(X, RunMode::kEval, &tape);
  Tensor up = Tensor::matrix(2, spec.n_features * spec.n_outputs);
  std::vector<double> grads(net.param_count(), 0.0);
  net.backward(tape, up, 0.0, grads);
  for (double g : grads) ASSERT_EQ(g, 0.0);
}

TEST(Network, DeltaGradientEqualsSummedLogitGradient) {
  GradCheckSetup s = make_gradcheck_setup(BackboneKind::kKanSpline, 7);
  // Rebuild with the bias term and zero targets so upstream gradients are
  // easy to recompute.
  Rng rng(7);
  NetworkSpec spec = s.net.spec();
  spec.relaxed = true;
  ShapNetwork net = ShapNetwork::build(spec, rng);
  std::size_t n = spec.n_features, d = spec.n_outputs;

  Tape tape;
  ForwardOut fo = net.forward(s.X, RunMode::kEval, &tape);
  Tensor up = Tensor::matrix(s.X.rows(), n * d);
  double expected = 0.0;
  for (std::size_t r = 0; r < s.X.rows(); ++r) {
    for (std::size_t j = 0; j < d; ++j) {
      double g = fo.logits(r, j);
      expected += g;
      for (std::size_t i = 0; i < n; ++i) up(r, i * d + j) += g;
    }
  }
  std::vector<double> grads(net.param_count(), 0.0);
  net.backward(tape, up, expected, grads);
  EXPECT_NEAR(grads[net.delta_index()], expected, 1e-12);
}

TEST(Network, GradCheckKanSpline) {
  EXPECT_LE(check_backbone(BackboneKind::kKanSpline, 11), 1e-4);
}

TEST(Network, GradCheckKanRbf) {
  EXPECT_LE(check_backbone(BackboneKind::kKanRbf, 12), 1e-4);
}

TEST(Network, GradCheckMlpBatchStats) {
  EXPECT_LE(check_backbone(BackboneKind::kMlp, 13), 1e-4);
}

TEST(Network, GradCheckSingleLinearLayerIsNearExact) {
  // Single linear map with a quadratic loss: central differences are exact up
  // to rounding.
  GradCheckSetup s = make_gradcheck_setup(BackboneKind::kMlp, 21, 3, 1, {});
  double err = squared_loss_gradcheck(s);
  EXPECT_LE(err, 1e-6);
}

TEST(Network, GradCheckCrossEntropyMlp) {
  // Three-layer perceptron under softmax cross-entropy.
  GradCheckSetup s = make_gradcheck_setup(BackboneKind::kMlp, 31, 4, 3, {6, 6, 6});
  std::size_t rows = s.X.rows();
  std::size_t n = 4, d = 3;
  std::vector<double> labels(rows);
  for (std::size_t r = 0; r < rows; ++r) labels[r] = static_cast<double>(r % d);

  auto value = [&](ShapNetwork& m) {
    ForwardOut fo = m.forward(s.X, s.mode);
    double acc = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      Tensor probs = stable_link(Tensor::row(std::vector<double>(
                                     fo.logits.row_ptr(r), fo.logits.row_ptr(r) + d)),
                                 LinkKind::kSoftmax);
      acc += prediction_loss(probs.data(), d, labels[r], TaskKind::kMulticlass);
    }
    return acc / static_cast<double>(rows);
  };
  auto grad = [&](ShapNetwork& m) {
    Tape tape;
    ForwardOut fo = m.forward(s.X, s.mode, &tape);
    Tensor up = Tensor::matrix(rows, n * d);
    double gd = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      Tensor probs = stable_link(Tensor::row(std::vector<double>(
                                     fo.logits.row_ptr(r), fo.logits.row_ptr(r) + d)),
                                 LinkKind::kSoftmax);
      std::vector<double> gl(d);
      prediction_loss_grad(probs.data(), fo.logits.row_ptr(r), d, labels[r],
                           TaskKind::kMulticlass, LinkKind::kSoftmax, gl.data());
      for (std::size_t j = 0; j < d; ++j) {
        double g = gl[j] / static_cast<double>(rows);
        gd += g;
        for (std::size_t i = 0; i < n; ++i) up(r, i * d + j) += g;
      }
    }
    std::vector<double> grads(m.param_count(), 0.0);
    m.backward(tape, up, gd, grads);
    return grads;
  };
  double err = gradient_check(s.net, value, grad, 1e-5);
  EXPECT_LE(err, 1e-4);
}

TEST(Network, GradCheckManySeeds) {
  // Spot sample of the 100-seed sweep run by the acceptance suite.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ASSERT_LE(check_backbone(BackboneKind::kKanSpline, 100 + seed), 1e-4) << "seed " << seed;
  }
}

TEST(Network, ParamCountMatchesFormulaPerBackbone) {
  Rng rng(3);
  for (BackboneKind kind : {BackboneKind::kKanSpline, BackboneKind::kKanRbf, BackboneKind::kMlp,
                            BackboneKind::kMlpMatched}) {
    NetworkSpec spec = small_spec(kind, 5, 2);
    spec.hidden = {8, 12, 8};
    ShapNetwork net = ShapNetwork::build(spec, rng);
    EXPECT_EQ(net.param_count(), expected_param_count(spec)) << to_string(kind);
  }
}

TEST(Network, MatchedMlpWithinTwoPercentOfKan) {
  NetworkSpec spec = small_spec(BackboneKind::kMlpMatched, 8, 1);
  spec.hidden = {64, 128, 64};
  NetworkSpec kan = spec;
  kan.backbone = BackboneKind::kKanSpline;
  auto target = static_cast<double>(expected_param_count(kan));
  auto matched = static_cast<double>(expected_param_count(spec));
  EXPECT_LE(std::fabs(matched - target) / target, 0.02);
}

TEST(Network, EvalForwardIsBatchOrderInvariant) {
  Rng rng(9);
  NetworkSpec spec = small_spec(BackboneKind::kKanSpline, 4, 2);
  ShapNetwork net = ShapNetwork::build(spec, rng);
  Tensor X = random_batch(6, 4, rng);
  ForwardOut fo = net.forward(X, RunMode::kEval);

  // Rows evaluated alone give identical values.
  for (std::size_t r = 0; r < 6; ++r) {
    Tensor one = Tensor::matrix(1, 4);
    std::copy(X.row_ptr(r), X.row_ptr(r) + 4, one.row_ptr(0));
    ForwardOut fr = net.forward(one, RunMode::kEval);
    for (std::size_t c = 0; c < 8; ++c) ASSERT_EQ(fr.phi(0, c), fo.phi(r, c));
  }
}

}  // namespace
}  // namespace selfshap
