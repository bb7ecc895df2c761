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
#include <vector>

#include "selfshap/layers.h"
#include "selfshap/rng.h"

namespace selfshap {
namespace {

// Dense solve by Gaussian elimination with partial pivoting; test-only oracle
// helper for fitting interpolating spline coefficients.
std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
  std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

KanLayerConfig small_cfg(std::size_t in, std::size_t out) {
  KanLayerConfig cfg;
  cfg.in_dim = in;
  cfg.out_dim = out;
  return cfg;
}

TEST(KanSpline, ZeroParametersGiveZeroOutput) {
  KanSplineLayer layer(small_cfg(3, 2));
  Tensor in = Tensor::row({0.3, -0.7, 0.1});
  Tensor out;
  layer.forward(in, out, RunMode::kEval);
  for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(out(0, j), 0.0);
}

TEST(KanSpline, BasisPartitionOfUnity) {
  KanSplineLayer layer(small_cfg(1, 1));
  std::vector<double> basis(layer.n_basis());
  for (double x = -1.3; x <= 1.3; x += 0.037) {
    layer.basis_row(x, basis.data());
    double sum = 0.0;
    for (double v : basis) sum += v;
    ASSERT_NEAR(sum, 1.0, 1e-12) << "x=" << x;
  }
}

// Coefficients solving the collocation system psi(t_k) = t_k reproduce the
// identity on the grid knots.
TEST(KanSpline, InterpolatingCoefficientsReproduceIdentityAtKnots) {
  KanLayerConfig cfg = small_cfg(1, 1);
  KanSplineLayer layer(cfg);
  std::size_t nb = layer.n_basis();

  // Collocation points: evenly spread over the grid range, one per basis.
  std::vector<double> pts(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    pts[k] = cfg.grid_low + (cfg.grid_high - cfg.grid_low) * static_cast<double>(k) /
                                static_cast<double>(nb - 1);
  }
  std::vector<std::vector<double>> A(nb, std::vector<double>(nb));
  std::vector<double> rhs(nb);
  std::vector<double> basis(nb);
  for (std::size_t r = 0; r < nb; ++r) {
    layer.basis_row(pts[r], basis.data());
    A[r] = basis;
    rhs[r] = pts[r];
  }
  std::vector<double> coef = solve_dense(A, rhs);
  for (std::size_t k = 0; k < nb; ++k) layer.coef_at(0, k)[0] = coef[k];
  layer.base_at(0)[0] = 0.0;

  // Check at the interior grid knots.
  double h = (cfg.grid_high - cfg.grid_low) / static_cast<double>(cfg.grid_size);
  for (std::size_t g = 0; g <= cfg.grid_size; ++g) {
    double x = cfg.grid_low + static_cast<double>(g) * h;
    Tensor out;
    Tensor in = Tensor::row({x});
    layer.forward(in, out, RunMode::kEval);
    ASSERT_NEAR(out(0, 0), x, 1e-10) << "knot " << x;
  }
}

TEST(KanSpline, IdenticalRowsGiveIdenticalOutputs) {
  KanSplineLayer layer(small_cfg(4, 3));
  Rng rng(1);
  layer.init(rng);
  Tensor in = Tensor::matrix(2, 4);
  for (std::size_t f = 0; f < 4; ++f) {
    in(0, f) = 0.2 * static_cast<double>(f) - 0.3;
    in(1, f) = in(0, f);
  }
  Tensor out;
  layer.forward(in, out, RunMode::kEval);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(out(0, j), out(1, j));
}

TEST(KanRbf, ZeroCoefficientsGiveZeros) {
  KanRbfLayer layer(small_cfg(2, 2));
  Tensor out;
  Tensor in = Tensor::row({0.5, -0.5});
  layer.forward(in, out, RunMode::kEval);
  EXPECT_EQ(out(0, 0), 0.0);
  EXPECT_EQ(out(0, 1), 0.0);
}

TEST(KanRbf, UnitCoefficientAtCenterContributesOne) {
  KanLayerConfig cfg = small_cfg(1, 1);
  cfg.grid_low = -2.0;
  cfg.grid_high = 2.0;
  KanRbfLayer layer(cfg);
  layer.coef_at(0, 3)[0] = 1.0;
  Tensor out;
  Tensor in = Tensor::row({layer.center(3)});
  layer.forward(in, out, RunMode::kEval);
  EXPECT_NEAR(out(0, 0), 1.0, 1e-12);  // other centers still add their tails
}

TEST(KanRbf, FarOutsideGridDecaysToZero) {
  KanLayerConfig cfg = small_cfg(1, 1);
  cfg.grid_low = -2.0;
  cfg.grid_high = 2.0;
  KanRbfLayer layer(cfg);
  for (std::size_t k = 0; k < cfg.rbf_centers; ++k) layer.coef_at(0, k)[0] = 1.0;
  Tensor out;
  Tensor in = Tensor::row({14.0});
  layer.forward(in, out, RunMode::kEval);
  EXPECT_LE(std::fabs(out(0, 0)), 1e-8);
}

TEST(BatchNorm, BatchOfOneInTrainModeThrows) {
  BatchNormLayer bn(3);
  Tensor in = Tensor::row({1.0, 2.0, 3.0});
  Tensor out;
  EXPECT_THROW(bn.forward(in, out, RunMode::kTrain), std::invalid_argument);
  EXPECT_NO_THROW(bn.forward(in, out, RunMode::kEval));
}

TEST(BatchNorm, TrainModeNormalizesBatch) {
  BatchNormLayer bn(1);
  Tensor in = Tensor::matrix(4, 1);
  in(0, 0) = 1.0;
  in(1, 0) = 2.0;
  in(2, 0) = 3.0;
  in(3, 0) = 4.0;
  Tensor out;
  bn.forward(in, out, RunMode::kTrain);
  double mean = 0.0, var = 0.0;
  for (int r = 0; r < 4; ++r) mean += out(r, 0);
  mean /= 4.0;
  for (int r = 0; r < 4; ++r) var += (out(r, 0) - mean) * (out(r, 0) - mean);
  var /= 4.0;
  EXPECT_NEAR(mean, 0.0, 1e-12);
  EXPECT_NEAR(var, 1.0, 1e-4);  // eps slightly shrinks the variance
}

TEST(BatchNorm, RunningStatsConvergeToBatchStats) {
  BatchNormLayer bn(2);
  Tensor in = Tensor::matrix(8, 2);
  Rng rng(3);
  for (std::size_t r = 0; r < 8; ++r) {
    in(r, 0) = 3.0 + rng.normal();
    in(r, 1) = -1.0 + 0.5 * rng.normal();
  }
  Tensor out;
  for (int it = 0; it < 1000; ++it) bn.forward(in, out, RunMode::kTrain);

  double mean0 = 0.0;
  for (std::size_t r = 0; r < 8; ++r) mean0 += in(r, 0);
  mean0 /= 8.0;
  EXPECT_NEAR(bn.running_mean()[0], mean0, 1e-9);

  double var1 = 0.0, mean1 = 0.0;
  for (std::size_t r = 0; r < 8; ++r) mean1 += in(r, 1);
  mean1 /= 8.0;
  for (std::size_t r = 0; r < 8; ++r) var1 += (in(r, 1) - mean1) * (in(r, 1) - mean1);
  var1 /= 7.0;  // running variance tracks the unbiased batch variance
  EXPECT_NEAR(bn.running_var()[1], var1, 1e-9);
}

TEST(BatchNorm, EvalModeIsPure) {
  BatchNormLayer bn(2);
  Tensor in = Tensor::row({0.3, -0.7});
  Tensor out1, out2;
  bn.forward(in, out1, RunMode::kEval);
  bn.forward(in, out2, RunMode::kEval);
  EXPECT_EQ(out1(0, 0), out2(0, 0));
  EXPECT_EQ(out1(0, 1), out2(0, 1));
}

TEST(Relu, ForwardAndMask) {
  ReluLayer relu(3);
  Tensor in = Tensor::row({-1.0, 0.0, 2.0});
  Tensor out;
  auto ctx = relu.forward(in, out, RunMode::kEval);
  EXPECT_EQ(out(0, 0), 0.0);
  EXPECT_EQ(out(0, 1), 0.0);
  EXPECT_EQ(out(0, 2), 2.0);
  Tensor g = Tensor::row({5.0, 5.0, 5.0});
  Tensor gin;
  relu.backward(*ctx, g, gin, nullptr);
  EXPECT_EQ(gin(0, 0), 0.0);
  EXPECT_EQ(gin(0, 1), 0.0);
  EXPECT_EQ(gin(0, 2), 5.0);
}

TEST(Layers, ParamCountFormulas) {
  KanLayerConfig cfg = small_cfg(5, 7);
  KanSplineLayer spline(cfg);
  EXPECT_EQ(spline.param_count(), 5u * 7u * (cfg.grid_size + cfg.spline_degree) + 5u * 7u);
  KanRbfLayer rbf(cfg);
  EXPECT_EQ(rbf.param_count(), 5u * 7u * cfg.rbf_centers);
  LinearLayer lin(5, 7);
  EXPECT_EQ(lin.param_count(), 5u * 7u + 7u);
  BatchNormLayer bn(7);
  EXPECT_EQ(bn.param_count(), 14u);
}

}  // namespace
}  // namespace selfshap
