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
#include "selfshap/shapley.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace selfshap {

CoalitionMask::CoalitionMask(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

CoalitionMask CoalitionMask::full(std::size_t n) {
  CoalitionMask m(n);
  for (std::size_t i = 0; i < n; ++i) m.set(i);
  return m;
}

CoalitionMask CoalitionMask::from_bits(std::size_t n, std::uint64_t bits) {
  if (n > 64) throw std::invalid_argument("CoalitionMask::from_bits: n > 64");
  CoalitionMask m(n);
  m.words_[0] = n == 64 ? bits : (bits & ((1ULL << n) - 1));
  m.card_ = static_cast<std::size_t>(std::popcount(m.words_[0]));
  return m;
}

void CoalitionMask::set(std::size_t i) {
  std::uint64_t& w = words_[i >> 6];
  std::uint64_t bit = 1ULL << (i & 63);
  if (!(w & bit)) {
    w |= bit;
    ++card_;
  }
}

void CoalitionMask::reset(std::size_t i) {
  std::uint64_t& w = words_[i >> 6];
  std::uint64_t bit = 1ULL << (i & 63);
  if (w & bit) {
    w &= ~bit;
    --card_;
  }
}

CoalitionMask CoalitionMask::complement() const {
  CoalitionMask m(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    if (!test(i)) m.set(i);
  }
  return m;
}

double shapley_kernel_weight(std::size_t n, std::size_t s) {
  if (s == 0 || s >= n) {
    throw std::invalid_argument("shapley_kernel_weight: s must be in [1, n-1]");
  }
  double nn = static_cast<double>(n), ss = static_cast<double>(s);
  if (n <= 30) {
    double binom = 1.0;
    std::size_t k = std::min(s, n - s);
    for (std::size_t i = 1; i <= k; ++i) {
      binom *= static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return (nn - 1.0) / (binom * ss * (nn - ss));
  }
  double log_binom = std::lgamma(nn + 1.0) - std::lgamma(ss + 1.0) - std::lgamma(nn - ss + 1.0);
  return std::exp(std::log(nn - 1.0) - log_binom - std::log(ss) - std::log(nn - ss));
}

KernelSampler::KernelSampler(std::size_t n, Rng rng) : n_(n), rng_(rng) {
  if (n < 2) throw std::invalid_argument("KernelSampler: needs at least 2 features");
  probs_.assign(n, 0.0);
  cdf_.assign(n, 0.0);
  double total = 0.0;
  for (std::size_t s = 1; s <= n - 1; ++s) {
    probs_[s] = (static_cast<double>(n) - 1.0) /
                (static_cast<double>(s) * static_cast<double>(n - s));
    total += probs_[s];
  }
  double acc = 0.0;
  for (std::size_t s = 1; s <= n - 1; ++s) {
    probs_[s] /= total;
    acc += probs_[s];
    cdf_[s] = acc;
  }
  cdf_[n - 1] = 1.0;
  scratch_.resize(n);
  for (std::size_t i = 0; i < n; ++i) scratch_[i] = static_cast<std::uint32_t>(i);
}

std::size_t KernelSampler::sample_size() {
  double u = rng_.uniform();
  auto it = std::lower_bound(cdf_.begin() + 1, cdf_.end(), u);
  return static_cast<std::size_t>(it - cdf_.begin());
}

CoalitionMask KernelSampler::sample() { return sample_of_size(sample_size()); }

CoalitionMask KernelSampler::sample_of_size(std::size_t s) {
  if (s == 0 || s >= n_) throw std::invalid_argument("sample_of_size: s must be in [1, n-1]");
  // Partial Fisher-Yates: the first s slots become a uniform s-subset.
  for (std::size_t i = 0; i < s; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng_.uniform_int(n_ - i));
    std::swap(scratch_[i], scratch_[j]);
  }
  CoalitionMask m(n_);
  for (std::size_t i = 0; i < s; ++i) m.set(scratch_[i]);
  return m;
}

std::string to_string(ValueFunctionKind k) {
  return k == ValueFunctionKind::kBaselineRemoval ? "baseline" : "marginal";
}

ValueFunctionKind value_function_from_string(const std::string& s) {
  if (s == "baseline" || s == "baseline_removal") return ValueFunctionKind::kBaselineRemoval;
  if (s == "marginal" || s == "marginal_expectation") return ValueFunctionKind::kMarginalExpectation;
  throw std::invalid_argument("unknown value function: " + s);
}

ValueFunction ValueFunction::baseline_removal(std::size_t n) {
  ValueFunction vf;
  vf.kind = ValueFunctionKind::kBaselineRemoval;
  vf.baseline.assign(n, 0.0);
  return vf;
}

ValueFunction ValueFunction::baseline_removal(std::vector<double> baseline) {
  ValueFunction vf;
  vf.kind = ValueFunctionKind::kBaselineRemoval;
  vf.baseline = std::move(baseline);
  return vf;
}

ValueFunction ValueFunction::marginal(Tensor background_rows) {
  if (background_rows.rows() == 0) {
    throw std::invalid_argument("ValueFunction::marginal: empty background");
  }
  ValueFunction vf;
  vf.kind = ValueFunctionKind::kMarginalExpectation;
  vf.baseline.assign(background_rows.cols(), 0.0);
  vf.background = std::move(background_rows);
  return vf;
}

void ValueFunction::validate(std::size_t n) const {
  if (kind == ValueFunctionKind::kBaselineRemoval) {
    if (baseline.size() != n) throw std::invalid_argument("value function: baseline length mismatch");
  } else {
    if (background.rows() == 0) throw std::invalid_argument("value function: empty background");
    if (background.cols() != n) throw std::invalid_argument("value function: background width mismatch");
  }
}

void apply_mask_row(const double* x, const CoalitionMask& mask, const double* baseline,
                    double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = mask.test(i) ? x[i] : baseline[i];
  }
}

Tensor apply_mask(const std::vector<double>& x, const CoalitionMask& mask,
                  const ValueFunction& vf) {
  std::size_t n = x.size();
  if (mask.n() != n) throw std::invalid_argument("apply_mask: mask width mismatch");
  vf.validate(n);
  if (vf.kind == ValueFunctionKind::kBaselineRemoval) {
    Tensor out = Tensor::matrix(1, n);
    apply_mask_row(x.data(), mask, vf.baseline.data(), out.row_ptr(0), n);
    return out;
  }
  std::size_t m = vf.background.rows();
  Tensor out = Tensor::matrix(m, n);
  for (std::size_t r = 0; r < m; ++r) {
    apply_mask_row(x.data(), mask, vf.background.row_ptr(r), out.row_ptr(r), n);
  }
  return out;
}

BatchGame batch_of(const Game& game) {
  return [game](const std::vector<CoalitionMask>& masks) {
    std::vector<double> out(masks.size());
    for (std::size_t i = 0; i < masks.size(); ++i) out[i] = game(masks[i]);
    return out;
  };
}

std::vector<double> exact_shapley(const Game& game, std::size_t n) {
  if (n == 0) throw std::invalid_argument("exact_shapley: n must be positive");
  if (n > 20) {
    throw std::invalid_argument(
        "exact_shapley: n > 20 would need 2^n game evaluations; use unbiased_kernelshap");
  }
  std::size_t total = std::size_t{1} << n;
  std::vector<double> value(total);
  for (std::uint64_t bits = 0; bits < total; ++bits) {
    value[bits] = game(CoalitionMask::from_bits(n, bits));
  }

  // w[s] = s! (n-s-1)! / n!
  std::vector<double> w(n);
  for (std::size_t s = 0; s < n; ++s) {
    w[s] = std::exp(std::lgamma(static_cast<double>(s) + 1.0) +
                    std::lgamma(static_cast<double>(n - s)) -
                    std::lgamma(static_cast<double>(n) + 1.0));
  }

  std::vector<double> phi(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bit = 1ULL << i;
    for (std::uint64_t bits = 0; bits < total; ++bits) {
      if (bits & bit) continue;
      std::size_t s = static_cast<std::size_t>(std::popcount(bits));
      phi[i] += w[s] * (value[bits | bit] - value[bits]);
    }
  }
  return phi;
}

void efficiency_normalize_column(double* column, std::size_t n, double target,
                                 std::size_t stride) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += column[i * stride];
  double shift = (target - sum) / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) column[i * stride] += shift;
}

void efficiency_normalize(AttributionMatrix& phi, const std::vector<double>& target) {
  if (target.size() != phi.d) throw std::invalid_argument("efficiency_normalize: target length mismatch");
  for (std::size_t j = 0; j < phi.d; ++j) {
    efficiency_normalize_column(phi.values.data() + j, phi.n, target[j], phi.d);
  }
}

BatchGame model_game(ShapNetwork& net, const std::vector<double>& x, std::size_t output,
                     const ValueFunction& vf) {
  std::size_t n = net.n_features();
  if (x.size() != n) throw std::invalid_argument("model_game: instance length mismatch");
  vf.validate(n);
  ShapNetwork* netp = &net;
  ValueFunction vfc = vf;
  std::vector<double> xc = x;

  if (vfc.kind == ValueFunctionKind::kBaselineRemoval) {
    return [netp, xc, output, vfc](const std::vector<CoalitionMask>& masks) {
      Tensor X = Tensor::matrix(masks.size(), xc.size());
      for (std::size_t r = 0; r < masks.size(); ++r) {
        apply_mask_row(xc.data(), masks[r], vfc.baseline.data(), X.row_ptr(r), xc.size());
      }
      ForwardOut fo = netp->forward(X, RunMode::kEval);
      std::vector<double> out(masks.size());
      for (std::size_t r = 0; r < masks.size(); ++r) out[r] = fo.logits(r, output);
      return out;
    };
  }

  return [netp, xc, output, vfc](const std::vector<CoalitionMask>& masks) {
    std::size_t m = vfc.background.rows();
    std::size_t n_feat = xc.size();
    Tensor X = Tensor::matrix(masks.size() * m, n_feat);
    for (std::size_t r = 0; r < masks.size(); ++r) {
      for (std::size_t b = 0; b < m; ++b) {
        apply_mask_row(xc.data(), masks[r], vfc.background.row_ptr(b),
                       X.row_ptr(r * m + b), n_feat);
      }
    }
    ForwardOut fo = netp->forward(X, RunMode::kEval);
    std::vector<double> out(masks.size(), 0.0);
    for (std::size_t r = 0; r < masks.size(); ++r) {
      for (std::size_t b = 0; b < m; ++b) out[r] += fo.logits(r * m + b, output);
      out[r] /= static_cast<double>(m);
    }
    return out;
  };
}

}  // namespace selfshap
