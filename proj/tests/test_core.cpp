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

#include "selfshap/adam.h"
#include "selfshap/link.h"
#include "selfshap/parallel.h"
#include "selfshap/rng.h"
#include "selfshap/tensor.h"

namespace selfshap {
namespace {

TEST(Tensor, ShapeDataInvariant) {
  Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t(1, 2), 6.0);
  EXPECT_THROW(Tensor({2, 3}, {1.0}), std::invalid_argument);
}

TEST(Tensor, FiniteCheck) {
  Tensor t({2}, {1.0, std::nan("")});
  EXPECT_FALSE(t.all_finite());
  EXPECT_THROW(t.check_finite("unit"), std::runtime_error);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    ASSERT_EQ(a.next_u64(), b.next_u64());
  }
}

TEST(Rng, SplitIndependentOfParentUse) {
  Rng a(7);
  Rng child_before = a.split(3);
  a.next_u64();
  a.next_u64();
  Rng child_after = a.split(3);
  for (int i = 0; i < 10; ++i) {
    ASSERT_EQ(child_before.next_u64(), child_after.next_u64());
  }
}

TEST(Rng, UniformMomentsRoughlyCorrect) {
  Rng r(123);
  double sum = 0.0, sum2 = 0.0;
  const int kDraws = 200000;
  for (int i = 0; i < kDraws; ++i) {
    double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sum2 += u * u;
  }
  double mean = sum / kDraws;
  double var = sum2 / kDraws - mean * mean;
  EXPECT_NEAR(mean, 0.5, 0.005);
  EXPECT_NEAR(var, 1.0 / 12.0, 0.005);
}

TEST(Rng, NormalMoments) {
  Rng r(99);
  double sum = 0.0, sum2 = 0.0;
  const int kDraws = 200000;
  for (int i = 0; i < kDraws; ++i) {
    double z = r.normal();
    sum += z;
    sum2 += z * z;
  }
  EXPECT_NEAR(sum / kDraws, 0.0, 0.01);
  EXPECT_NEAR(sum2 / kDraws, 1.0, 0.02);
}

TEST(Rng, UniformIntInRangeAndUnbiased) {
  Rng r(5);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    ++counts[r.uniform_int(7)];
  }
  for (int c : counts) {
    EXPECT_NEAR(c, 10000, 400);
  }
}

TEST(StableLink, Identity) {
  Tensor t = Tensor::row({2.0, -1.0});
  Tensor out = stable_link(t, LinkKind::kIdentity);
  EXPECT_EQ(out(0, 0), 2.0);
  EXPECT_EQ(out(0, 1), -1.0);
}

TEST(StableLink, SigmoidAtZero) {
  Tensor out = stable_link(Tensor::row({0.0}), LinkKind::kSigmoid);
  EXPECT_DOUBLE_EQ(out(0, 0), 0.5);
}

TEST(StableLink, SoftmaxSymmetry) {
  Tensor out = stable_link(Tensor::row({3.0, 3.0, 3.0}), LinkKind::kSoftmax);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(out(0, j), 1.0 / 3.0, 1e-15);
}

TEST(StableLink, SoftmaxExtremeLogitsSumToOne) {
  Rng r(11);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> logits(5);
    for (auto& v : logits) v = (r.uniform() * 2.0 - 1.0) * 1e4;
    Tensor out = stable_link(Tensor::row(logits), LinkKind::kSoftmax);
    double sum = 0.0;
    for (int j = 0; j < 5; ++j) {
      ASSERT_GE(out(0, j), 0.0);
      ASSERT_LE(out(0, j), 1.0);
      sum += out(0, j);
    }
    ASSERT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
  AdamState adam(3, 0.1);
  std::vector<double> p = {1.0, -2.0, 0.5};
  std::vector<double> g = {0.0, 0.0, 0.0};
  std::vector<double> before = p;
  adam.step(p.data(), g.data(), 3);
  EXPECT_EQ(p, before);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  // With bias correction the first update is lr * g / (|g| + eps').
  AdamState adam(1, 0.1);
  std::vector<double> p = {0.0};
  std::vector<double> g = {1.0};
  adam.step(p.data(), g.data(), 1);
  EXPECT_NEAR(p[0], -0.1, 1e-6);
}

TEST(Adam, ConstantGradientDecreasesMonotonically) {
  AdamState adam(1, 0.01);
  std::vector<double> p = {1.0};
  std::vector<double> g = {2.5};
  double prev = p[0];
  for (int i = 0; i < 100; ++i) {
    adam.step(p.data(), g.data(), 1);
    ASSERT_LT(p[0], prev);
    prev = p[0];
  }
  EXPECT_EQ(adam.step_count(), 100);
}

TEST(Adam, ShapeMismatchThrows) {
  AdamState adam(2);
  std::vector<double> p = {0.0, 0.0, 0.0};
  std::vector<double> g = {1.0, 1.0, 1.0};
  EXPECT_THROW(adam.step(p.data(), g.data(), 3), std::invalid_argument);
}

TEST(Parallel, ChunkBoundariesIndependentOfThreadCount) {
  auto run = [](int threads) {
    set_num_threads(threads);
    std::vector<double> sums(4, 0.0);
    parallel_chunks(1000, 250, [&](std::size_t c, std::size_t b, std::size_t e) {
      double s = 0.0;
      for (std::size_t i = b; i < e; ++i) s += std::sin(static_cast<double>(i));
      sums[c] = s;
    });
    double total = 0.0;
    for (double s : sums) total += s;
    return total;
  };
  double t1 = run(1);
  double t4 = run(4);
  set_num_threads(2);
  EXPECT_EQ(t1, t4);  // bit-identical by construction
}

}  // namespace
}  // namespace selfshap
